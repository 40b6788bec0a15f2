"""Generalized eigenfunction transform diagonalizing the radial sector.

For alpha >= 0 the half-line operator -d^2/dr^2 with Robin condition
f'(0) = 4 pi alpha f(0) has purely absolutely continuous spectrum [0, inf)
with generalized eigenfunctions

    e_k(r) = sqrt(2/pi) sin(k r + delta(k)),   tan delta(k) = k / (4 pi alpha),

(delta = pi/2 at alpha = 0, delta = 0 at FRIEDRICHS).  For alpha < 0 a
rank-one bound-state channel sqrt(2 beta) e^{-beta r}, beta = 4 pi |alpha|,
is appended so completeness still holds.

Numerics: synthesis integrates the smooth k-dependence by Gauss-Legendre on
[0, k_max]; analysis integrates the oscillatory r-dependence with an
endpoint-corrected (Gregory) trapezoid whose Euler-Maclaurin terms use the
analytic derivatives of sin(k r + delta) at r = 0 and finite-difference jets
of the field, giving round-trip defects ~1e-9 on band-limited fields where
plain Newton-Cotes rules lose four orders of magnitude.

A second, exactly unitary calculus for time stepping is attached lazily: the
frame Hamiltonian A^T diag(k^2) A (A the Simpson-weighted analysis frame) is
diagonalized once; its eigenbasis is orthonormal in the discrete Simpson
metric, so repeated application of the induced propagator conserves the grid
mass to roundoff.  The solver uses that; everything norm-like here uses the
quadrature pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from ._quadrature import (
    GREGORY_ORDER,
    corrected_integral,
    gauss_legendre,
    gregory_endpoint_coefficients,
)
from .errors import (
    AliasingWarning,
    CompletenessError,
    ResolutionError,
    SmallKSingularityError,
    TransitionRegularityError,
)
from .operator import FRIEDRICHS, PointInteraction
from .radial import FOUR_PI, DecomposedState, RadialGrid, ReducedField, green_profile, recompose

_TRANSITION = (0.5, 1.5)


def is_transition(s: float, tol: float = 1e-12) -> bool:
    return any(abs(s - t) <= tol for t in _TRANSITION)


def _phase(alpha, k: np.ndarray) -> np.ndarray:
    if alpha is FRIEDRICHS:
        return np.zeros_like(k)
    if alpha == 0.0:
        return np.full_like(k, 0.5 * math.pi)
    return np.arctan2(k, FOUR_PI * alpha)


class RobinTransform:
    """Precomputed transform for one (grid, alpha) pair.

    Attributes follow the physical construction: `k_nodes`/`k_weights` are
    the momentum quadrature, `eigen_matrix` holds E[j, m] = e_{k_m}(r_j)
    analytically, `delta` the scattering phase.  `completeness_defect` is the
    measured worst round-trip error on a probe band-limited ensemble.
    """

    def __init__(self, grid: RadialGrid, alpha, k_max: float | None = None,
                 n_k: int | None = None, completeness_tol: float = 1e-6):
        self.grid = grid
        self.alpha = alpha
        if alpha is not FRIEDRICHS:
            alpha = float(alpha)
            self.alpha = alpha
        h = grid.h
        if k_max is None:
            k_max = 1.0 / h
        if k_max * h > 1.0 + 1e-12:
            raise ResolutionError(
                f"k_max*h = {k_max * h:.3f} > 1 violates the resolution contract")
        self.k_max = float(k_max)
        self.n_k = int(n_k) if n_k is not None else 2 * grid.n
        self.k_nodes, self.k_weights = gauss_legendre(self.n_k, 0.0, self.k_max)
        self.delta = _phase(self.alpha, self.k_nodes)
        self.eigen_matrix = math.sqrt(2.0 / math.pi) * np.sin(
            np.outer(grid.nodes, self.k_nodes) + self.delta[None, :])
        # Gregory correction matrix: uhat_corr = Ck @ (jets of f at 0)
        cs = gregory_endpoint_coefficients(h)
        n_jets = 2 * GREGORY_ORDER
        Ck = np.zeros((self.n_k, n_jets))
        for m in range(1, GREGORY_ORDER + 1):
            p = 2 * m - 1
            for j in range(p + 1):
                q = p - j
                Ck[:, j] += (cs[m - 1] * comb(p, j) * math.sqrt(2.0 / math.pi)
                             * self.k_nodes ** q * np.sin(self.delta + q * 0.5 * math.pi))
        self._gregory = Ck
        self._wtrap = grid.trapezoid
        # bound-state channel for alpha < 0
        self.bound_beta = None
        self.bound_vector = None
        if self.alpha is not FRIEDRICHS and self.alpha < 0:
            beta = FOUR_PI * abs(self.alpha)
            self.bound_beta = beta
            self.bound_vector = math.sqrt(2.0 * beta) * np.exp(-beta * grid.nodes)
        self._calculus = None
        self.completeness_defect = self._measure_completeness()
        if self.completeness_defect > completeness_tol:
            raise CompletenessError(
                f"round-trip defect {self.completeness_defect:.2e} exceeds "
                f"{completeness_tol:.1e}; refine the grid or shrink k_max")

    # -- basic properties --------------------------------------------------
    @property
    def is_friedrichs(self) -> bool:
        return self.alpha is FRIEDRICHS

    def operator(self) -> PointInteraction:
        return PointInteraction(self.alpha)

    def friedrichs_twin(self) -> "RobinTransform":
        """Same grid and momentum quadrature with the free (Dirichlet) phase;
        used for classical H^s norms."""
        if self.is_friedrichs:
            return self
        return RobinTransform(self.grid, FRIEDRICHS, self.k_max, self.n_k)

    # -- forward / inverse (quadrature semantics) ---------------------------
    def _analyze(self, values: np.ndarray) -> np.ndarray:
        nj = self.grid.jet_matrix.shape[1]
        jets_r = self.grid.jet_matrix @ values.real[:nj]
        jets_i = self.grid.jet_matrix @ values.imag[:nj]
        re = self.eigen_matrix.T @ (self._wtrap * values.real) + self._gregory @ jets_r
        im = self.eigen_matrix.T @ (self._wtrap * values.imag) + self._gregory @ jets_i
        return re + 1j * im

    def _synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.eigen_matrix @ (self.k_weights * coeffs)

    def _measure_completeness(self) -> float:
        """Worst round-trip error on three band-limited probe bumps (the
        bound channel, when present, participates in the reconstruction)."""
        worst = 0.0
        for k0_frac, s_frac in ((0.15, 0.035), (0.3, 0.05), (0.45, 0.06)):
            k0 = k0_frac * self.k_max
            s0 = s_frac * self.k_max
            uh = (self.k_nodes ** 2) * np.exp(-((self.k_nodes - k0) / s0) ** 2)
            f = self._synthesize(uh.astype(complex))
            back = self._synthesize(self._analyze(f))
            if self.bound_vector is not None:
                back = back + self._bound_coefficient(f) * self.bound_vector
            worst = max(worst, float(np.linalg.norm(back - f) / np.linalg.norm(f)))
        return worst

    def _bound_coefficient(self, values: np.ndarray) -> complex:
        g = values * self.bound_vector
        return complex(corrected_integral(g, self.grid.h,
                                          jet_matrix=self.grid.jet_matrix))

    def halfline_l2(self, values: np.ndarray) -> float:
        """Corrected quadrature of int_0^inf |f|^2 dr (Parseval reference)."""
        v = corrected_integral(np.abs(values) ** 2, self.grid.h,
                               jet_matrix=self.grid.jet_matrix)
        return math.sqrt(max(float(np.real(v)), 0.0))

    # -- exactly unitary stepping calculus ----------------------------------
    def unitary_calculus(self):
        """(eigenvalues, eigenvectors, analysis) of the Simpson-frame
        Hamiltonian; eigenvectors are orthonormal in the Simpson metric.

        Cached; cost one dense symmetric eigendecomposition of size n+1.
        """
        if self._calculus is None:
            w = self.grid.simpson
            sq = np.sqrt(w)
            A = (self.eigen_matrix * np.sqrt(self.k_weights)).T * sq
            G = A * self.k_nodes[:, None]
            H = G.T @ G
            if self.bound_vector is not None:
                b = sq * self.bound_vector
                b = b / np.linalg.norm(b)
                H += (-self.bound_beta ** 2) * np.outer(b, b)
            H = 0.5 * (H + H.T)
            lam, Qs = np.linalg.eigh(H)
            if self.bound_vector is None:
                lam = np.clip(lam, 0.0, None)
            else:
                lam = np.where(lam > -1e-12 * lam.max(), np.clip(lam, 0.0, None), lam)
            Q = Qs / sq[:, None]          # f = Q c
            QtW = (Q * w[:, None]).T      # c = QtW f
            self._calculus = (lam, Q, QtW)
        return self._calculus

    def evolve_values(self, values: np.ndarray, time: float) -> np.ndarray:
        """e^{i t Delta_alpha} through the unitary calculus (exact Simpson-mass
        conservation, exact group law)."""
        lam, Q, QtW = self.unitary_calculus()
        c = QtW @ values.astype(complex)
        return Q @ (np.exp(-1j * lam * time) * c)

    def kinetic_energy(self, values: np.ndarray) -> float:
        """<psi, -Delta_alpha psi> in L^2(R^3) through the unitary calculus
        (the exactly conserved quadratic functional of the linear flow)."""
        lam, Q, QtW = self.unitary_calculus()
        c = QtW @ values.astype(complex)
        return FOUR_PI * float(np.sum(lam * np.abs(c) ** 2))


@dataclass(frozen=True)
class SpectralField:
    """Momentum representation of a reduced field: coefficients u_hat(k_m) on
    the transform's quadrature nodes, plus the bound-channel amplitude when
    the transform carries one."""

    transform: RobinTransform
    coefficients: np.ndarray
    bound_amplitude: complex = 0.0

    def tail_fraction(self, frac: float = 0.9) -> float:
        t = self.transform
        dens = t.k_weights * np.abs(self.coefficients) ** 2
        total = float(np.sum(dens)) + abs(self.bound_amplitude) ** 2
        if total == 0.0:
            return 0.0
        cut = t.k_nodes >= frac * t.k_max
        return float(np.sum(dens[cut]) / total)

    def parseval_mass(self) -> float:
        """sum w_m |u_hat|^2 (+ bound channel) ~ ||f||^2_{L^2(0,inf)}."""
        t = self.transform
        return float(np.sum(t.k_weights * np.abs(self.coefficients) ** 2)
                     + abs(self.bound_amplitude) ** 2)


def build_transform(grid: RadialGrid, alpha, k_max: float | None = None,
                    n_k: int | None = None,
                    completeness_tol: float = 1e-6) -> RobinTransform:
    """Construct the transform; raises ResolutionError for k_max*h > 1 and
    CompletenessError when the measured round-trip defect is out of budget."""
    a = alpha.alpha if isinstance(alpha, PointInteraction) else alpha
    return RobinTransform(grid, a, k_max=k_max, n_k=n_k,
                          completeness_tol=completeness_tol)


def forward(psi: ReducedField, t: RobinTransform) -> SpectralField:
    """Quadrature realization of u_hat(k) = int f(r) e_k(r) dr.

    Warns when more than 1% of the spectral mass sits beyond 0.9 k_max.
    """
    if psi.grid != t.grid:
        raise ValueError("field grid does not match transform grid")
    coeffs = t._analyze(psi.values)
    bound = complex(t._bound_coefficient(psi.values)) if t.bound_vector is not None else 0.0
    out = SpectralField(t, coeffs, bound)
    tail = out.tail_fraction()
    if tail > 0.01:
        warnings.warn(f"spectral tail mass {tail:.2%} beyond 0.9 k_max",
                      AliasingWarning, stacklevel=2)
    return out


def inverse(F: SpectralField) -> ReducedField:
    t = F.transform
    vals = t._synthesize(F.coefficients)
    if t.bound_vector is not None:
        vals = vals + F.bound_amplitude * t.bound_vector
    return ReducedField(t.grid, vals)


def fractional_apply(psi: ReducedField, t: RobinTransform, s: float,
                     shifted: bool = False, lam: float = 0.0) -> ReducedField:
    """Spectral multiplier k^s (unshifted) or (lam + k^2)^{s/2} (shifted),
    realizing the fractional powers of the operator on the radial sector."""
    if not -2.0 <= s <= 2.0:
        raise ValueError("s must lie in [-2, 2]")
    if shifted and lam < 0:
        raise ValueError("shift lam must be nonnegative")
    if t.bound_vector is not None:
        raise ValueError("fractional powers need a nonnegative operator (alpha >= 0)")
    F = forward(psi, t)
    k = t.k_nodes
    if s < 0 and not (shifted and lam > 0):
        # u_hat must vanish at k = 0; extrapolate from the lowest nodes
        u0 = abs(1.5 * F.coefficients[0] - 0.6 * F.coefficients[1]
                 + 0.1 * F.coefficients[2])
        scale = float(np.max(np.abs(F.coefficients))) or 1.0
        if u0 > 1e-6 * scale:
            raise SmallKSingularityError(
                "negative power of a field with nonvanishing spectral density at k=0")
    mult = (lam + k ** 2) ** (0.5 * s) if shifted else k ** s
    return inverse(SpectralField(t, mult * F.coefficients))


def perturbed_norm(psi: ReducedField, t: RobinTransform, s: float) -> float:
    """Fractional perturbed Sobolev norm in the half-line convention:

        ( sum_m w_m (1 + k_m^2)^s |u_hat(k_m)|^2 )^{1/2}.

    Multiply by sqrt(4 pi) for the L^2(R^3)-normalized value.
    """
    if not 0.0 <= s <= 2.0:
        raise ValueError("s must lie in [0, 2]")
    if t.bound_vector is not None:
        raise ValueError("perturbed norms need alpha >= 0")
    F = forward(psi, t)
    val = float(np.sum(t.k_weights * (1.0 + t.k_nodes ** 2) ** s
                       * np.abs(F.coefficients) ** 2))
    return math.sqrt(max(val, 0.0))


@dataclass(frozen=True)
class EquivalenceBand:
    ratio_min: float
    ratio_max: float
    regime: str
    count: int


def norm_equivalence_report(samples: list[DecomposedState], t: RobinTransform,
                            s: float) -> EquivalenceBand:
    """Empirical two-sided norm-equivalence band for the three-regime
    characterization of the perturbed spaces.

    regime (i)  s in [0,1/2):  RHS = classical H^s norm of the whole field;
    regime (ii) s in (1/2,3/2): RHS = ||phi||_{H^s} + (1 + alpha)|kappa|;
    regime (iii) s in (3/2,2]:  RHS = ||phi_lam||_{H^s}, samples must satisfy
    the charge link.  Transition s values are rejected.
    """
    if is_transition(s):
        raise TransitionRegularityError(
            f"s = {s} is a transition regularity; no clean norm equivalence holds")
    if t.is_friedrichs:
        raise ValueError("equivalence bands compare against the Friedrichs twin; "
                         "build the transform at finite alpha")
    free = t.friedrichs_twin()
    alpha = t.alpha
    ratios = []
    for st in samples:
        psi = recompose(st)
        lhs = perturbed_norm(psi, t, s)
        if s < 0.5:
            rhs = perturbed_norm(psi, free, s)
        elif s < 1.5:
            rhs = perturbed_norm(st.phi, free, s) + (1.0 + alpha) * abs(st.kappa)
        else:
            from .radial import domain_link_residual
            if domain_link_residual(st, alpha) > 1e-4:
                raise ValueError("regime (iii) samples must satisfy the charge link")
            rhs = perturbed_norm(st.phi, free, s)
        if rhs == 0.0 and lhs == 0.0:
            continue
        ratios.append(lhs / rhs)
    if not ratios:
        raise ValueError("no nontrivial samples")
    regime = "i" if s < 0.5 else ("ii" if s < 1.5 else "iii")
    return EquivalenceBand(min(ratios), max(ratios), regime, len(ratios))


def fractional_green_check(t: RobinTransform, lam: float, s: float,
                           fit_range: tuple[float, float] = None) -> float:
    """Fitted constant of the pointwise fractional-derivative bound on the
    Green function:

        |D^s G_lam(x)| <= C (e^{-sqrt(lam)|x|}/|x| + e^{-sqrt(lam)|x|}/|x|^{1+s})

    with D^s the free fractional derivative, evaluated through the Friedrichs
    twin; returns max over grid nodes in [h, r_max/2] of the LHS/RHS ratio.

    The k^s multiplier gets a smooth cosine roll-off on the top 15% of the
    band: D^s G has a slowly decaying spectrum and a hard cutoff would bury
    the (tiny) large-r values under Gibbs ringing of the band edge.  The
    taper vanishes from the result under grid refinement, which is exactly
    what the refinement-stability contract measures.
    """
    if not 0.0 < s <= 2.0:
        raise ValueError("s must lie in (0, 2]")
    if lam <= 0:
        raise ValueError("lam must be positive")
    free = t.friedrichs_twin()
    g = green_profile(lam, free.grid)
    F = forward(g, free)
    k = free.k_nodes
    x = np.clip((k / free.k_max - 0.85) / 0.15, 0.0, 1.0)
    taper = 0.5 * (1.0 + np.cos(math.pi * x))
    ds_g = inverse(SpectralField(free, (k ** s) * taper * F.coefficients))
    r = free.grid.nodes
    lo, hi = fit_range if fit_range is not None else (free.grid.h, 0.5 * free.grid.r_max)
    sel = (r >= lo) & (r <= hi)
    rs = r[sel]
    lhs = np.abs(ds_g.values[sel]) / rs           # |D^s G|(r), 3D values
    envelope = np.exp(-math.sqrt(lam) * rs) * (1.0 / rs + rs ** (-1.0 - s))
    return float(np.max(lhs / envelope))
