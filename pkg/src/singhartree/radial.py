"""Radial grids, reduced fields, norms, convolution, and the regular/singular
decomposition.

Every 3D spherically symmetric function psi(x) is carried as its reduced
profile f(r) = r*psi(r) on a uniform grid of [0, r_max]; the radial part of
the point-interaction Hamiltonian then acts as -d^2/dr^2 on the half line
with a Robin condition f'(0) = 4*pi*alpha*f(0).  A finite reduced value
f(0) != 0 encodes a 1/|x| singularity of psi with charge kappa = 4*pi*f(0),
since the reduced profile of the Green function G_lam is
exp(-sqrt(lam)*r)/(4*pi), equal to 1/(4*pi) at the origin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._quadrature import (
    boundary_jet_matrix,
    corrected_integral,
    cumulative_simpson,
    extrapolate_to_zero,
    gauss_legendre,
    simpson_weights,
    trapezoid_weights,
)
from .errors import QuadratureDivergenceError, TruncationWarning

FOUR_PI = 4.0 * math.pi

# relative threshold below which a reduced value at r=0 counts as zero
_CHARGE_TOL = 1e-9


class RadialGrid:
    """Uniform radial grid: nodes r_j = j*h, j = 0..n, with h = r_max/n.

    n must be even (composite Simpson panels) and at least 16.  Grids compare
    equal by (n, r_max) and cache their quadrature weights.
    """

    __slots__ = ("r_max", "n", "h", "nodes", "_simpson", "_trapezoid", "_jets")

    def __init__(self, r_max: float, n: int):
        if r_max <= 0:
            raise ValueError("r_max must be positive")
        if n < 16 or n % 2 != 0:
            raise ValueError("n must be an even integer >= 16")
        self.r_max = float(r_max)
        self.n = int(n)
        self.h = self.r_max / self.n
        self.nodes = np.arange(self.n + 1) * self.h
        self._simpson = None
        self._trapezoid = None
        self._jets = None

    @property
    def simpson(self) -> np.ndarray:
        if self._simpson is None:
            self._simpson = simpson_weights(self.n, self.h)
        return self._simpson

    @property
    def trapezoid(self) -> np.ndarray:
        if self._trapezoid is None:
            self._trapezoid = trapezoid_weights(self.n, self.h)
        return self._trapezoid

    @property
    def jet_matrix(self) -> np.ndarray:
        if self._jets is None:
            self._jets = boundary_jet_matrix(self.h)
        return self._jets

    def refine(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.r_max, self.n * factor)

    def __eq__(self, other):
        return (isinstance(other, RadialGrid)
                and other.n == self.n and other.r_max == self.r_max)

    def __hash__(self):
        return hash((self.n, self.r_max))

    def __repr__(self):
        return f"RadialGrid(r_max={self.r_max}, n={self.n})"


def _as_complex(values, n):
    v = np.ascontiguousarray(values, dtype=complex)
    if v.shape != (n + 1,):
        raise ValueError(f"expected {n + 1} samples, got shape {v.shape}")
    if not (np.all(np.isfinite(v.real)) and np.all(np.isfinite(v.imag))):
        raise ValueError("field samples must be finite")
    return v


@dataclass(frozen=True)
class ReducedField:
    """Reduced profile f(r) = r*psi(r) of a radial 3D function psi.

    f(0) is a genuine stored sample: it equals lim r->0 of r*psi and detects
    the 1/|x| singularity.  The represented function must vanish for
    r >= r_max (truncation contract); operations warn when that is violated.
    """

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_complex(self.values, self.grid.n))

    # -- arithmetic (value semantics) ------------------------------------
    def __add__(self, other: "ReducedField") -> "ReducedField":
        self._check_same_grid(other)
        return ReducedField(self.grid, self.values + other.values)

    def __sub__(self, other: "ReducedField") -> "ReducedField":
        self._check_same_grid(other)
        return ReducedField(self.grid, self.values - other.values)

    def __mul__(self, c: complex) -> "ReducedField":
        return ReducedField(self.grid, self.values * c)

    __rmul__ = __mul__

    def conj(self) -> "ReducedField":
        return ReducedField(self.grid, np.conj(self.values))

    def _check_same_grid(self, other):
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    # -- pointwise 3D values ---------------------------------------------
    def charge_value(self) -> complex:
        """f(0), the coefficient of the 1/(4 pi |x|)-normalized singularity."""
        return complex(self.values[0])

    def has_charge(self) -> bool:
        scale = float(np.max(np.abs(self.values))) or 1.0
        return abs(self.values[0]) > _CHARGE_TOL * scale

    def psi_values(self) -> np.ndarray:
        """Samples of psi(r) = f(r)/r; psi(0) by even-order extrapolation
        (infinite when the field carries a charge)."""
        out = np.empty_like(self.values)
        out[1:] = self.values[1:] / self.grid.nodes[1:]
        if self.has_charge():
            out[0] = complex(np.inf, 0.0)
        else:
            out[0] = extrapolate_to_zero(out[1:7])
        return out

    def psi_origin(self) -> complex:
        """psi(0) for chargeless fields (the slope of f at 0)."""
        q = self.values[1:7] / self.grid.nodes[1:7]
        return complex(extrapolate_to_zero(q))

    def tail_fraction(self, frac: float = 0.9) -> float:
        """Mass fraction carried beyond frac*r_max (boundary-contamination
        monitor)."""
        w = self.grid.simpson
        dens = w * np.abs(self.values) ** 2
        total = float(np.sum(dens))
        if total == 0.0:
            return 0.0
        cut = self.grid.nodes >= frac * self.grid.r_max
        return float(np.sum(dens[cut]) / total)

    def halfline_l2(self) -> float:
        """L^2(0, infinity) norm of the reduced profile itself (no 4*pi);
        Gregory-corrected so that charged fields are integrated accurately."""
        g = np.abs(self.values) ** 2
        val = corrected_integral(g, self.grid.h, jet_matrix=self.grid.jet_matrix)
        return math.sqrt(max(float(val.real if np.iscomplexobj(val) else val), 0.0))


@dataclass(frozen=True)
class PlainRadialField:
    """Samples g(r_j) of a bounded radial function (potentials w, Hartree
    fields w*|u|^2).  g(0) must be finite."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_complex(self.values, self.grid.n))

    def __add__(self, other: "PlainRadialField") -> "PlainRadialField":
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")
        return PlainRadialField(self.grid, self.values + other.values)

    def __mul__(self, c: complex) -> "PlainRadialField":
        return PlainRadialField(self.grid, self.values * c)

    __rmul__ = __mul__

    def real_values(self) -> np.ndarray:
        return self.values.real.copy()

    def reduced(self) -> ReducedField:
        """r*g(r) as a ReducedField (always chargeless)."""
        return ReducedField(self.grid, self.grid.nodes * self.values)

    def support_radius(self, rel_tol: float = 1e-12) -> float:
        """Largest radius where |g| exceeds rel_tol * max|g|."""
        a = np.abs(self.values)
        m = a.max()
        if m == 0.0:
            return 0.0
        idx = np.nonzero(a > rel_tol * m)[0]
        return float(self.grid.nodes[idx[-1]])


@dataclass
class Potential:
    """Radial interaction profile w(r) with lazily cached norm metadata."""

    profile: PlainRadialField
    cached_norms: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.max(np.abs(self.profile.values.imag)) > 0.0:
            raise ValueError("potentials must be real-valued")

    @property
    def grid(self) -> RadialGrid:
        return self.profile.grid

    @property
    def values(self) -> np.ndarray:
        return self.profile.values.real

    def is_nonnegative(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.values >= -tol))

    def norm(self, descriptor: tuple, compute) -> float:
        """Fetch a cached norm, computing and caching it on first use."""
        if descriptor not in self.cached_norms:
            self.cached_norms[descriptor] = float(compute())
        return self.cached_norms[descriptor]


@dataclass(frozen=True)
class DecomposedState:
    """Realization of psi = phi_lam + kappa_lam * G_lam.

    phi is the regular part (reduced profile vanishing at r=0), kappa the
    singular charge, lam the positive shift parameter of the splitting.
    """

    phi: ReducedField
    kappa: complex
    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("shift parameter lam must be positive")
        scale = float(np.max(np.abs(self.phi.values))) + abs(self.kappa)
        if scale > 0 and abs(self.phi.values[0]) > 1e-8 * scale:
            raise ValueError("regular part must vanish at r = 0")


# ----------------------------------------------------------------------
# Green function
# ----------------------------------------------------------------------

def evaluate_green(lam: float, r):
    """G_lam(r) = exp(-sqrt(lam) r) / (4 pi r); +inf at r = 0.

    Accepts scalars or arrays; raises for lam <= 0 or negative r.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("r must be nonnegative")
    with np.errstate(divide="ignore"):
        out = np.exp(-math.sqrt(lam) * r_arr) / (FOUR_PI * r_arr)
    out = np.where(r_arr == 0.0, np.inf, out)
    return float(out) if np.isscalar(r) else out


def green_profile(lam: float, grid: RadialGrid) -> ReducedField:
    """Reduced profile of G_lam: exp(-sqrt(lam) r)/(4 pi), finite 1/(4 pi)
    at the origin."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return ReducedField(grid, np.exp(-math.sqrt(lam) * grid.nodes) / FOUR_PI)


# ----------------------------------------------------------------------
# Norms
# ----------------------------------------------------------------------

def lp_norm(psi: ReducedField, p: float) -> float:
    """L^p(R^3) norm of the represented radial function.

    Uses (4 pi * int |f|^p r^{2-p} dr)^{1/p}.  For charged fields with
    2 < p < 3 the first cell is integrated with the substitution r = u^2
    (the integrand is merely Hoelder there); p >= 3 with a charge diverges.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    grid, f = psi.grid, psi.values
    absf = np.abs(f)
    charged = psi.has_charge()
    if math.isinf(p):
        if charged:
            return math.inf
        vals = np.abs(psi.psi_values())
        return float(np.max(vals))
    if charged and p >= 3.0:
        raise QuadratureDivergenceError(
            "1/|x| singularity is not in L^p near the origin for p >= 3")
    integrand = np.zeros(grid.n + 1)
    r = grid.nodes
    integrand[1:] = absf[1:] ** p * r[1:] ** (2.0 - p)
    if p <= 2.0 or not charged:
        # r=0 value: |psi(0)|^p * r^2 -> 0 for chargeless; |f(0)|^p for p=2
        if p == 2.0:
            integrand[0] = absf[0] ** 2
        else:
            integrand[0] = 0.0
        total = float(np.sum(grid.simpson * integrand))
    else:
        # charged, 2 < p < 3: handle [0, h] by Gauss nodes in u = sqrt(r)
        w_rest = simpson_weights(grid.n - 1, grid.h)
        total = float(np.sum(w_rest * integrand[1:]))
        u_nodes, u_w = gauss_legendre(12, 0.0, math.sqrt(grid.h))
        r_sub = u_nodes ** 2
        # quadratic interpolation of f through nodes 0..2
        c0, c1, c2 = f[0], f[1], f[2]
        hh = grid.h
        fa = np.abs(c0
                    + ((-3 * c0 + 4 * c1 - c2) / (2 * hh)) * r_sub
                    + ((c0 - 2 * c1 + c2) / (2 * hh * hh)) * r_sub ** 2)
        total += float(np.sum(u_w * 2.0 * u_nodes ** (5.0 - 2.0 * p) * fa ** p))
    return (FOUR_PI * total) ** (1.0 / p)


def lp_norm_plain(g: PlainRadialField, p: float) -> float:
    """L^p(R^3) norm of a bounded radial function sampled directly."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if math.isinf(p):
        return float(np.max(np.abs(g.values)))
    integrand = np.abs(g.values) ** p * g.grid.nodes ** 2
    return (FOUR_PI * float(np.sum(g.grid.simpson * integrand))) ** (1.0 / p)


def lorentz_weak_norm(w: Potential, q: float) -> float:
    """Weak Lorentz norm sup_t t * |{|w| > t}|^{1/q}.

    The superlevel-set volume is computed exactly for the piecewise-linear
    interpolant of |w| (4 pi r^2 integrated analytically across crossings);
    the supremum runs over closed level sets at the sampled values, so that
    plateaus (e.g. ball indicators) attain their limiting value.
    """
    if q <= 1:
        raise ValueError("q must exceed 1")
    a = np.abs(w.values)
    r = w.grid.nodes
    if a.max() == 0.0:
        return 0.0
    thresholds = np.unique(a[a > 0])
    # volumes of {|w| >= t} for the piecewise-linear |w|
    lo, hi = a[:-1], a[1:]
    r0, r1 = r[:-1], r[1:]
    cube = lambda x: x ** 3
    best = 0.0
    t_eps = 1.0 - 1e-12
    for t in thresholds:
        tt = t * t_eps   # closed level set
        above0 = lo >= tt
        above1 = hi >= tt
        vol = 0.0
        full = above0 & above1
        vol += np.sum(cube(r1[full]) - cube(r0[full]))
        part = above0 ^ above1
        if np.any(part):
            lo_p, hi_p = lo[part], hi[part]
            r0_p, r1_p = r0[part], r1[part]
            frac = (tt - lo_p) / (hi_p - lo_p)
            rc = r0_p + frac * (r1_p - r0_p)
            enters = above1[part]          # crossing upward: [rc, r1]
            vol += np.sum(np.where(enters, cube(r1_p) - cube(rc),
                                   cube(rc) - cube(r0_p)))
        measure = (FOUR_PI / 3.0) * vol
        best = max(best, t * measure ** (1.0 / q))
    if a[-1] > 0 and a[-1] >= thresholds[0]:
        return math.inf   # level sets leak past r_max: unbounded within contract
    return float(best)


# ----------------------------------------------------------------------
# Radial convolution
# ----------------------------------------------------------------------

def _check_truncation(w_vals, g_vals, grid, what):
    """Warn when either factor carries real mass in the outer shell
    r > 0.9 r_max, where the truncated kernel drops contributions with
    r + s beyond the stored cumulative range."""
    shell = grid.nodes > 0.9 * grid.r_max
    for name, a in (("w", np.abs(w_vals)), ("g", np.abs(g_vals))):
        total = float(np.sum(grid.simpson * a ** 2))
        if total == 0.0:
            continue
        outer = float(np.sum(grid.simpson[shell] * a[shell] ** 2))
        if outer > 1e-6 * total:
            warnings.warn(
                f"{what}: factor {name} carries {outer / total:.2e} of its mass "
                f"beyond 0.9 r_max; the truncated kernel drops r+s tails",
                TruncationWarning, stacklevel=3)


def _bracket_cumulative(w_vals: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """W[i] = int_0^{ih} t w(t) dt, extended constant past r_max."""
    tw = grid.nodes * w_vals
    W = cumulative_simpson(tw, grid.h)
    return np.concatenate([W, np.full(grid.n, W[-1], dtype=W.dtype)])


def _bracket_matrix(W_ext: np.ndarray, n: int) -> np.ndarray:
    """B[j, m] = W(r_j + s_m) - W(|r_j - s_m|) on the index lattice."""
    j = np.arange(n + 1)
    plus = np.minimum(j[:, None] + j[None, :], 2 * n)
    minus = np.abs(j[:, None] - j[None, :])
    return W_ext[plus] - W_ext[minus]


class ConvolutionKernel:
    """Precomputed radial-convolution kernel for a fixed w on a fixed grid.

    (w*g)(r) = (2 pi / r) * int_0^inf s g(s) [W(r+s) - W(|r-s|)] ds with
    W the cumulative integral of t*w(t).  All endpoint pairs r_j +- s_m land
    on grid nodes, so W is precomputed once and the convolution is a single
    O(n^2) weighted mat-vec.  A second entry point convolves with a density
    |u|^2 given through m(s) = |f(s)|^2 = s^2 |u|^2(s), which stays finite
    for charged fields.
    """

    def __init__(self, w: PlainRadialField, warn: bool = True):
        self.grid = w.grid
        self.warn = warn
        self.w_values = w.values.real.astype(float) if np.max(np.abs(w.values.imag)) == 0 \
            else w.values
        W_ext = _bracket_cumulative(self.w_values, self.grid)
        B = _bracket_matrix(W_ext, self.grid.n)
        r = self.grid.nodes
        wq = self.grid.simpson
        # rows j>=1: (2 pi / r_j) * sum_m wq_m * integrand_m
        self._rows_plain = np.empty_like(B)
        self._rows_plain[1:] = (2.0 * math.pi / r[1:, None]) * B[1:] * (wq * r)[None, :]
        # C[j,m] = B[j,m]/s_m with the s->0 limit 2 r_j w(r_j)
        C = np.empty_like(B)
        C[:, 1:] = B[:, 1:] / r[None, 1:]
        C[:, 0] = 2.0 * r * np.real(self.w_values)
        self._rows_density = np.empty_like(C)
        self._rows_density[1:] = (2.0 * math.pi / r[1:, None]) * C[1:] * wq[None, :]
        # r = 0 row of both variants: 4 pi * int s^2 g(s) w(s) ds
        self._row0 = FOUR_PI * wq * (r ** 2) * self.w_values
        self._row0_density = FOUR_PI * wq * self.w_values

    def convolve(self, g: PlainRadialField) -> PlainRadialField:
        if g.grid != self.grid:
            raise ValueError("grid mismatch")
        if self.warn:
            _check_truncation(self.w_values, g.values, self.grid, "radial_convolve")
        vals = np.empty(self.grid.n + 1, dtype=complex)
        vals[1:] = self._rows_plain[1:] @ g.values
        vals[0] = self._row0 @ g.values
        if np.max(np.abs(np.asarray(self.w_values).imag)) == 0 and np.max(np.abs(g.values.imag)) == 0:
            vals = vals.real + 0j
        return PlainRadialField(self.grid, vals)

    def convolve_density(self, u: ReducedField) -> PlainRadialField:
        """w * |u|^2 with |u|^2 represented through m(s) = |f(s)|^2."""
        if u.grid != self.grid:
            raise ValueError("grid mismatch")
        m = np.abs(u.values) ** 2
        if self.warn:
            _check_truncation(self.w_values, m, self.grid, "hartree_potential")
        vals = np.empty(self.grid.n + 1, dtype=complex)
        vals[1:] = self._rows_density[1:] @ m
        vals[0] = self._row0_density @ m
        return PlainRadialField(self.grid, vals.real + 0j)

    def convolve_product(self, u1: ReducedField, u2: ReducedField) -> PlainRadialField:
        """w * (u1 u2) through m(s) = f1(s) f2(s) (complex allowed)."""
        m = u1.values * u2.values
        vals = np.empty(self.grid.n + 1, dtype=complex)
        vals[1:] = self._rows_density[1:] @ m
        vals[0] = self._row0_density @ m
        return PlainRadialField(self.grid, vals)


def radial_convolve(w: PlainRadialField, g: PlainRadialField) -> PlainRadialField:
    """3D convolution of two bounded radial functions via the reduced kernel.

    The two one-sided kernel evaluations (cumulative in w applied to g, and
    vice versa) are averaged, which makes the discrete operation exactly
    symmetric under w <-> g; each side alone is symmetric only to O(h^4).
    """
    a = ConvolutionKernel(w).convolve(g)
    b = ConvolutionKernel(g).convolve(w)
    return PlainRadialField(w.grid, 0.5 * (a.values + b.values))


# ----------------------------------------------------------------------
# Regular/singular decomposition
# ----------------------------------------------------------------------

def decompose(psi: ReducedField, lam: float = 1.0, alpha=None) -> DecomposedState:
    """Split psi = phi_lam + kappa G_lam with kappa = 4 pi f(0).

    The split is purely kinematic (alpha is accepted for signature parity
    with the domain predicate but does not enter); use `in_operator_domain`
    to test the charge link of a specific operator.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    kappa = FOUR_PI * psi.values[0]
    g_vals = np.exp(-math.sqrt(lam) * psi.grid.nodes) / FOUR_PI
    phi_vals = psi.values - kappa * g_vals
    phi_vals[0] = 0.0   # exact by construction; clear roundoff
    return DecomposedState(ReducedField(psi.grid, phi_vals), complex(kappa), float(lam))


def recompose(state: DecomposedState) -> ReducedField:
    """phi_lam + kappa G_lam back on the grid."""
    grid = state.phi.grid
    g_vals = np.exp(-math.sqrt(state.lam) * grid.nodes) / FOUR_PI
    return ReducedField(grid, state.phi.values + state.kappa * g_vals)


def phi_at_origin(state: DecomposedState) -> complex:
    """phi_lam(0) via even-order Richardson of phi_reduced(r)/r."""
    return state.phi.psi_origin()


def domain_link_residual(state: DecomposedState, alpha: float) -> float:
    """Normalized defect of kappa = phi(0) / (alpha + sqrt(lam)/(4 pi)).

    Evaluated in the inverted form |kappa*(alpha + sqrt(lam)/4pi) - phi(0)|
    so that the resolvent-singular case alpha + sqrt(lam)/4pi = 0 (bound
    state at lam = (4 pi alpha)^2) stays finite; both forms agree whenever
    the denominator is nonzero.
    """
    denom = alpha + math.sqrt(state.lam) / FOUR_PI
    phi0 = phi_at_origin(state)
    lhs = state.kappa * denom
    scale = abs(lhs) + abs(phi0)
    if scale == 0.0:
        return 0.0
    return float(abs(lhs - phi0) / scale)


def in_operator_domain(state: DecomposedState, alpha: float, tol: float = 1e-6) -> bool:
    """Charge-link predicate for membership in the operator domain."""
    return domain_link_residual(state, alpha) < tol
