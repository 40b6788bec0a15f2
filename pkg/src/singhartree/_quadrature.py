"""Quadrature and finite-difference kernels on the uniform radial grid.

Everything here works on plain numpy arrays; the field/grid wrappers live in
:mod:`singhartree.radial`.  Two quadrature families are provided:

* composite Simpson weights (the workhorse for norms, inner products and the
  convolution kernel; error O(h^4) for smooth integrands),
* endpoint-corrected trapezoid ("Gregory") sums used by the spectral analysis,
  where the integrand f(r)*sin(kr+delta) has a non-vanishing jet at r = 0 and
  plain Newton-Cotes rules lose O((kh)^3 h) per mode.

The Gregory corrections are Euler-Maclaurin terms B_{2m} h^{2m}/(2m)! *
g^{(2m-1)}(0) up to m = 5; the right endpoint needs no correction because the
truncation contract makes fields vanish identically near r_max.
"""

from __future__ import annotations

from math import factorial

import numpy as np

# Bernoulli numbers B_2..B_10 for the Euler-Maclaurin corrections.
BERNOULLI = {2: 1.0 / 6, 4: -1.0 / 30, 6: 1.0 / 42, 8: -1.0 / 30, 10: 5.0 / 66}
GREGORY_ORDER = 5          # corrections h^2 .. h^10
JET_STENCIL = 16           # nodes used for one-sided boundary jets


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n intervals (n+1 nodes).

    Odd n >= 3 uses Simpson on the first n-3 intervals plus a 3/8 rule on the
    last three, keeping the O(h^4) error budget.  n = 1 degrades to the
    trapezoid (only reached by time quadrature on a single step).
    """
    if n < 1:
        raise ValueError("need at least 1 interval")
    if n == 1:
        return np.array([0.5, 0.5]) * h
    if n == 3:
        return np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    w = np.zeros(n + 1)
    if n % 2 == 0:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= h / 3.0
    else:
        m = n - 3
        w[: m + 1] = simpson_weights(m, h)
        w[m:] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2.0
    return w


def fornberg_weights(xs: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at x0 from nodes xs
    (Fornberg's recursion)."""
    nn = len(xs)
    c = np.zeros((nn, m + 1))
    c1 = 1.0
    c4 = xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, nn):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def boundary_jet_matrix(h: float, max_order: int = 2 * GREGORY_ORDER,
                        stencil: int = JET_STENCIL) -> np.ndarray:
    """Rows j = 0..max_order-1 extract f^(j)(0) from the first `stencil` nodes."""
    xs = np.arange(stencil) * h
    J = np.zeros((max_order, stencil))
    for j in range(max_order):
        J[j, :] = fornberg_weights(xs, 0.0, j)
    return J


def gregory_endpoint_coefficients(h: float, order: int = GREGORY_ORDER) -> np.ndarray:
    """c_m = B_{2m} h^{2m} / (2m)! for m = 1..order (left-endpoint corrections
    with a '+' sign when the field vanishes at the right end)."""
    return np.array([BERNOULLI[2 * m] * h ** (2 * m) / factorial(2 * m)
                     for m in range(1, order + 1)])


def corrected_integral(values: np.ndarray, h: float, jets: np.ndarray | None = None,
                       jet_matrix: np.ndarray | None = None) -> complex:
    """Gregory-corrected trapezoid integral of samples on [0, n*h].

    Assumes the integrand vanishes (with derivatives) at the right endpoint.
    `jets` may pass precomputed odd-order derivatives at 0.
    """
    n = len(values) - 1
    base = h * (np.sum(values) - 0.5 * (values[0] + values[-1]))
    if jets is None:
        if jet_matrix is None:
            jet_matrix = boundary_jet_matrix(h)
        jets = jet_matrix @ values[: jet_matrix.shape[1]]
    cs = gregory_endpoint_coefficients(h)
    corr = sum(cs[m - 1] * jets[2 * m - 1] for m in range(1, GREGORY_ORDER + 1))
    return base + corr


def derivative_matrix(n: int, h: float, order: int = 1) -> np.ndarray:
    """Dense 4th-order derivative matrix on the uniform grid (one-sided rows
    near the boundary).  Only built for modest n; O(n) banded application is
    handled by `apply_derivative`."""
    xs = np.arange(n + 1) * h
    D = np.zeros((n + 1, n + 1))
    if order == 1:
        c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    else:
        c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    for j in range(2, n - 1):
        D[j, j - 2: j + 3] = c
    for j in (0, 1):
        D[j, :7] = fornberg_weights(xs[:7], xs[j], order)
    for j in (n - 1, n):
        D[j, -7:] = fornberg_weights(xs[-7:], xs[j], order)
    return D


def apply_derivative(values: np.ndarray, h: float, order: int = 1) -> np.ndarray:
    """4th-order finite-difference derivative of sampled values (banded,
    one-sided near the ends)."""
    n = len(values) - 1
    out = np.empty_like(values, dtype=complex)
    if order == 1:
        out[2:-2] = (values[:-4] - 8 * values[1:-3]
                     + 8 * values[3:-1] - values[4:]) / (12.0 * h)
    elif order == 2:
        out[2:-2] = (-values[:-4] + 16 * values[1:-3] - 30 * values[2:-2]
                     + 16 * values[3:-1] - values[4:]) / (12.0 * h * h)
    else:
        raise ValueError("order must be 1 or 2")
    xs = np.arange(7) * h
    for j in (0, 1):
        w = fornberg_weights(xs, xs[j], order)
        out[j] = w @ values[:7]
        out[-1 - j] = ((-1.0) ** order) * (w @ values[::-1][:7])
    return out


# Lagrange extrapolation to 0 from nodes {h, .., 6h}: (-1)^{j-1} C(6, j)
_RICHARDSON6 = np.array([6.0, -15.0, 20.0, -15.0, 6.0, -1.0])


def extrapolate_to_zero(values: np.ndarray) -> complex:
    """Limit q(0) from q(h), ..., q(6h) by 6-point polynomial Richardson.

    Error O(h^6 q^(6)); no evenness assumption, so it stays exact for the
    mixed profiles phi_lam = psi - kappa G_lam whose Green-difference parts
    carry odd powers of r.  Used for phi(0), psi(0) and density limits.
    """
    return complex(_RICHARDSON6 @ np.asarray(values[:6]))


def cumulative_simpson(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral W[j] = int_0^{jh} of sampled values, O(h^4).

    Each pair of intervals gets the local parabola; odd endpoints use the
    half-panel integral of the same parabola.  Requires an even interval
    count (the RadialGrid contract).
    """
    n = len(values) - 1
    if n % 2 != 0:
        raise ValueError("cumulative_simpson needs an even interval count")
    out = np.zeros(n + 1, dtype=np.result_type(values.dtype, float))
    # full-panel increments over [2i, 2i+2] and half-panel over [2i, 2i+1]
    full = (h / 3.0) * (values[:-2] + 4.0 * values[1:-1] + values[2:])
    half = (h / 12.0) * (5.0 * values[:-2] + 8.0 * values[1:-1] - values[2:])
    out[1::2] = half[::2]
    out[2::2] = full[::2]
    np.cumsum(out[2::2], out=out[2::2])
    out[3::2] += out[2:-1:2]
    return out


def gauss_legendre(n_nodes: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    mid, rad = 0.5 * (a + b), 0.5 * (b - a)
    return mid + rad * x, rad * w
