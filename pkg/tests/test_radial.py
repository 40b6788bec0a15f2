import math

import numpy as np
import pytest

from singhartree import (
    DecomposedState,
    PlainRadialField,
    Potential,
    QuadratureDivergenceError,
    RadialGrid,
    ReducedField,
    TruncationWarning,
    decompose,
    domain_link_residual,
    evaluate_green,
    green_profile,
    lorentz_weak_norm,
    lp_norm,
    radial_convolve,
    recompose,
)
from singhartree.radial import FOUR_PI
from singhartree.sampling import philox_rng, smooth_potential, smooth_regular_field

from oracles import brute_force_convolution


def test_green_point_values():
    assert evaluate_green(1.0, 1.0) == pytest.approx(math.exp(-1) / FOUR_PI, rel=1e-14)
    assert evaluate_green(4.0, 0.5) == pytest.approx(math.exp(-1) / (2 * math.pi), rel=1e-14)
    with pytest.raises(ValueError):
        evaluate_green(-1.0, 1.0)
    with pytest.raises(ValueError):
        evaluate_green(1.0, -0.1)


def test_green_reduced_at_origin(grid512):
    for lam in (0.3, 1.0, 4.0):
        assert green_profile(lam, grid512).values[0] == pytest.approx(1 / FOUR_PI, rel=1e-15)


def test_l2_norm_of_green(grid512):
    val = lp_norm(green_profile(1.0, grid512), 2)
    assert val == pytest.approx(1.0 / math.sqrt(8 * math.pi), rel=1e-6)


def test_lp_norm_zero_and_scaling(grid512, rng):
    zero = ReducedField(grid512, np.zeros(grid512.n + 1))
    for p in (1.0, 2.0, 2.5, math.inf):
        assert lp_norm(zero, p) == 0.0
    f = smooth_regular_field(grid512, rng)
    for p in (1.5, 2.0, 2.7):
        assert lp_norm(3.5 * f, p) == pytest.approx(3.5 * lp_norm(f, p), rel=1e-13)


def test_lp_norm_divergence_flag(grid512):
    G = green_profile(1.0, grid512)
    with pytest.raises(QuadratureDivergenceError):
        lp_norm(G, 4.0)
    assert lp_norm(G, math.inf) == math.inf


def test_lp_norm_gaussian_closed_form(grid512):
    # ||exp(-r^2)||_p^p = (pi/p)^{3/2}
    r = grid512.nodes
    f = ReducedField(grid512, r * np.exp(-r ** 2))
    for p in (1.0, 2.0, 2.5):
        exact = (math.pi / p) ** (1.5 / p)
        assert lp_norm(f, p) == pytest.approx(exact, rel=1e-8)


def test_lorentz_inverse_powers():
    grid = RadialGrid(12.0, 1024)
    for gamma in (0.5, 1.0, 4.0 / 3.0):
        vals = np.maximum(grid.nodes, 0.02) ** (-gamma)
        vals[grid.nodes > 0.8 * grid.r_max] = 0.0
        got = lorentz_weak_norm(Potential(PlainRadialField(grid, vals)), 3.0 / gamma)
        assert got == pytest.approx((FOUR_PI / 3.0) ** (gamma / 3.0), rel=0.02)


def test_lorentz_ball_indicator():
    grid = RadialGrid(12.0, 1024)
    vals = (grid.nodes <= 1.0).astype(float)
    got = lorentz_weak_norm(Potential(PlainRadialField(grid, vals)), 3.0)
    assert got == pytest.approx((FOUR_PI / 3.0) ** (1.0 / 3.0), rel=0.02)


def test_lorentz_zero(grid512):
    w = Potential(PlainRadialField(grid512, np.zeros(grid512.n + 1)))
    assert lorentz_weak_norm(w, 3.0) == 0.0


def test_convolution_gaussian_closed_form():
    grid = RadialGrid(12.0, 768)
    w = PlainRadialField(grid, np.exp(-grid.nodes ** 2))
    conv = radial_convolve(w, w)
    exact = (math.pi / 2) ** 1.5 * np.exp(-grid.nodes ** 2 / 2)
    assert np.max(np.abs(conv.values.real - exact)) / exact.max() < 1e-6
    assert conv.values.real[0] == pytest.approx((math.pi / 2) ** 1.5, rel=1e-6)


def test_convolution_symmetry(grid512, rng):
    a = smooth_potential(grid512, rng).profile
    b = smooth_potential(grid512, rng).profile
    ab = radial_convolve(a, b)
    ba = radial_convolve(b, a)
    assert np.max(np.abs(ab.values - ba.values)) < 1e-12


def test_convolution_approximate_identity():
    grid = RadialGrid(12.0, 1024)
    eps = 0.15
    r = grid.nodes
    mollifier = PlainRadialField(grid, np.exp(-(r / eps) ** 2) / (math.pi ** 1.5 * eps ** 3))
    target = PlainRadialField(grid, np.exp(-r ** 2))
    conv = radial_convolve(mollifier, target)
    # closed form: (1+eps^2)^{-3/2} exp(-r^2/(1+eps^2))
    exact = (1 + eps ** 2) ** -1.5 * np.exp(-r ** 2 / (1 + eps ** 2))
    assert np.max(np.abs(conv.values.real - exact)) < 1e-6
    assert np.max(np.abs(conv.values.real - target.values.real)) < 2.0 * eps ** 2


@pytest.mark.parametrize("pair_seed", range(10))
def test_convolution_vs_brute_force(pair_seed):
    grid = RadialGrid(12.0, 768)
    rng = philox_rng(1000 + pair_seed)
    def draw():
        return [(rng.uniform(0.2, 1.0) * rng.choice([-1, 1]),
                 rng.uniform(0.6, 1.4), rng.uniform(0.0, 2.0)) for _ in range(2)]
    pw, pg = draw(), draw()
    def mk(params):
        return lambda rr: sum(a * np.exp(-((rr - c) / wd) ** 2) for a, wd, c in params)
    wf, gf = mk(pw), mk(pg)
    ours = radial_convolve(PlainRadialField(grid, wf(grid.nodes)),
                           PlainRadialField(grid, gf(grid.nodes)))
    radii = np.linspace(0.3, 5.0, 9)
    oracle = brute_force_convolution(wf, gf, radii, box=9.0, n_cells=96)
    ours_at = np.interp(radii, grid.nodes, ours.values.real)
    scale = np.max(np.abs(oracle))
    assert np.max(np.abs(ours_at - oracle)) / scale < 1e-4


def test_convolution_truncation_warning():
    grid = RadialGrid(12.0, 512)
    wide = PlainRadialField(grid, np.exp(-(grid.nodes / 8.0) ** 2))
    with pytest.warns(TruncationWarning):
        radial_convolve(wide, wide)


def test_decompose_green_and_gaussian(grid512):
    st = decompose(green_profile(1.0, grid512), 1.0)
    assert st.kappa == pytest.approx(1.0, rel=1e-12)
    assert np.max(np.abs(st.phi.values)) < 1e-12
    r = grid512.nodes
    gauss = ReducedField(grid512, r * np.exp(-r ** 2))
    st2 = decompose(gauss, 1.0)
    assert abs(st2.kappa) < 1e-12
    assert np.max(np.abs(st2.phi.values - gauss.values)) < 1e-12


def test_decompose_recompose_roundtrip(grid512, rng):
    for _ in range(6):
        phi = smooth_regular_field(grid512, rng)
        kappa = complex(rng.normal(), rng.normal())
        lam = rng.uniform(0.4, 3.0)
        st = DecomposedState(phi, kappa, lam)
        back = decompose(recompose(st), lam)
        assert abs(back.kappa - kappa) < 1e-12
        assert np.max(np.abs(back.phi.values - phi.values)) < 1e-12


def test_domain_link_construct_then_check():
    grid = RadialGrid(12.0, 1024)
    r = grid.nodes
    alpha, lam = 1.0, 1.0
    kappa = 1.0 / (alpha + math.sqrt(lam) / FOUR_PI)
    psi = ReducedField(grid, r * np.exp(-r ** 2)
                       + kappa * np.exp(-math.sqrt(lam) * r) / FOUR_PI)
    st = decompose(psi, lam)
    assert domain_link_residual(st, alpha) < 1e-8
    # link is lam-independent for the same field
    assert domain_link_residual(decompose(psi, 4.0), alpha) < 1e-8
    # breaking the link is detected
    bad = ReducedField(grid, psi.values + 0.3 * np.exp(-r) / FOUR_PI)
    assert domain_link_residual(decompose(bad, lam), alpha) > 1e-3


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(-1.0, 512)
    with pytest.raises(ValueError):
        RadialGrid(10.0, 15)
    with pytest.raises(ValueError):
        RadialGrid(10.0, 17)   # odd
