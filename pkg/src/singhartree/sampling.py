"""Deterministic ensembles of fields and potentials.

All generators take a numpy Generator (seed it with the counter-based Philox
bit generator for cross-run reproducibility: np.random.default_rng(
np.random.Philox(seed))) and respect the truncation contract by windowing
profiles well inside r_max.
"""

from __future__ import annotations

import math

import numpy as np

from .radial import FOUR_PI, PlainRadialField, Potential, RadialGrid, ReducedField
from .transform import RobinTransform, SpectralField, inverse


def philox_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.Philox(seed))


def _taper(grid: RadialGrid, frac: float = 0.75) -> np.ndarray:
    """Smooth window forcing support inside frac*r_max."""
    x = grid.nodes / (frac * grid.r_max)
    return np.exp(-x ** 8)


def smooth_regular_field(grid: RadialGrid, rng: np.random.Generator,
                         n_bumps: int = 3, complex_phase: bool = True) -> ReducedField:
    """Regular (chargeless) reduced field: r times a sum of Gaussians."""
    r = grid.nodes
    psi = np.zeros(grid.n + 1, dtype=complex)
    for _ in range(n_bumps):
        amp = rng.uniform(0.3, 1.0)
        width = rng.uniform(0.6, 1.6)
        center = rng.uniform(0.0, 0.25 * grid.r_max)
        phase = rng.uniform(0, 2 * math.pi) if complex_phase else 0.0
        psi += amp * np.exp(1j * phase) * np.exp(-((r - center) / width) ** 2)
    return ReducedField(grid, r * psi * _taper(grid))


def domain_element(grid: RadialGrid, rng: np.random.Generator, alpha: float,
                   lam: float = 1.0) -> ReducedField:
    """Charge-linked element of the operator domain: phi + kappa G_lam with
    kappa = phi(0)/(alpha + sqrt(lam)/4pi) computed from the analytic phi(0)."""
    r = grid.nodes
    amp = rng.uniform(0.3, 1.0)
    width = rng.uniform(0.7, 1.5)
    phase = np.exp(1j * rng.uniform(0, 2 * math.pi))
    phi_vals = amp * phase * np.exp(-(r / width) ** 2)     # phi(0) = amp*phase
    kappa = amp * phase / (alpha + math.sqrt(lam) / FOUR_PI)
    f = r * phi_vals + kappa * np.exp(-math.sqrt(lam) * r) / FOUR_PI
    return ReducedField(grid, f)


def band_limited_field(t: RobinTransform, rng: np.random.Generator,
                       band: tuple[float, float] = (0.12, 0.45)) -> ReducedField:
    """Field synthesized from a smooth spectral bump inside the stated band
    (fractions of k_max); decays superalgebraically inside r_max."""
    k = t.k_nodes
    k0 = rng.uniform(*band) * t.k_max
    s0 = rng.uniform(0.03, 0.06) * t.k_max
    s0 = min(s0, k0 / 4.5, (0.9 * t.k_max - k0) / 4.5)
    wiggle = 1.0 + 0.3 * np.sin(rng.uniform(0.5, 2.0) * k + rng.uniform(0, math.pi))
    uhat = (k ** 2) * np.exp(-((k - k0) / s0) ** 2) * wiggle
    phase = np.exp(1j * rng.uniform(0, 2 * math.pi))
    return inverse(SpectralField(t, phase * uhat.astype(complex)))


def resolvent_element(t: RobinTransform, rng: np.random.Generator,
                      lam: float = 1.0,
                      band: tuple[float, float] = (0.08, 0.2)) -> ReducedField:
    """(-Delta_alpha + lam)^{-1} g for a band-limited g: a charge-linked
    domain element that is also spectrally compatible with the band."""
    k = t.k_nodes
    k0 = rng.uniform(*band) * t.k_max
    s0 = min(rng.uniform(0.02, 0.04) * t.k_max, k0 / 4.5)
    ghat = (k ** 2) * np.exp(-((k - k0) / s0) ** 2)
    phase = np.exp(1j * rng.uniform(0, 2 * math.pi))
    return inverse(SpectralField(t, phase * ghat / (lam + k ** 2)))


def smooth_potential(grid: RadialGrid, rng: np.random.Generator,
                     nonnegative: bool = False) -> Potential:
    """Bounded radial potential: sum of signed Gaussian shells."""
    r = grid.nodes
    w = np.zeros(grid.n + 1)
    for _ in range(3):
        amp = rng.uniform(0.2, 0.8)
        if not nonnegative and rng.uniform() < 0.4:
            amp = -amp
        width = rng.uniform(0.7, 1.8)
        center = rng.uniform(0.0, 0.2 * grid.r_max)
        w += amp * np.exp(-((r - center) / width) ** 2)
    if nonnegative:
        w = np.abs(w)
    return Potential(PlainRadialField(grid, w * _taper(grid)))


def gaussian_field(grid: RadialGrid, a: float = 1.0, amplitude: float = 1.0) -> ReducedField:
    """Reduced profile of amplitude * exp(-a r^2)."""
    r = grid.nodes
    return ReducedField(grid, amplitude * r * np.exp(-a * r ** 2))


def gaussian_potential(grid: RadialGrid, a: float = 1.0, amplitude: float = 1.0) -> Potential:
    return Potential(PlainRadialField(grid, amplitude * np.exp(-a * grid.nodes ** 2)))
