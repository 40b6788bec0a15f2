import math
import warnings

import numpy as np
import pytest

from singhartree import (
    FRIEDRICHS,
    AdmissibleRangeError,
    RadialGrid,
    WindowError,
    admissible_pair,
    build_transform,
    dispersive_decay_experiment,
    evolve_linear,
    fractional_apply,
    lp_norm,
    strichartz_norm,
)
from singhartree.propagator import fitted_strichartz_constant
from singhartree.sampling import band_limited_field, gaussian_field

from oracles import free_gaussian_lr_norm, free_gaussian_reduced


def test_admissible_pairs():
    assert admissible_pair(2.0).q == math.inf
    p = admissible_pair(18.0 / 7.0)
    assert p.q == pytest.approx(6.0, rel=1e-12)
    p25 = admissible_pair(2.5)
    assert 2.0 / p25.q == pytest.approx(3.0 * (0.5 - 1.0 / 2.5), rel=1e-12)
    for bad in (1.9, 3.0, 3.5):
        with pytest.raises(AdmissibleRangeError):
            admissible_pair(bad)


def test_evolve_identity_and_unitarity(transforms, rng):
    t = transforms[1.0]
    f = band_limited_field(t, rng, band=(0.08, 0.25))
    u0 = evolve_linear(f, t, 0.0)
    assert np.linalg.norm(u0.values - f.values) / np.linalg.norm(f.values) < 1e-12
    for time in (0.05, 0.2):
        u = evolve_linear(f, t, time)
        n0, n1 = t.halfline_l2(f.values), t.halfline_l2(u.values)
        assert abs(n1 - n0) / n0 < 1e-8


def test_evolve_group_law(transforms, rng):
    t = transforms[0.1]
    f = band_limited_field(t, rng, band=(0.08, 0.22))
    u12 = evolve_linear(evolve_linear(f, t, 0.07), t, 0.13)
    u = evolve_linear(f, t, 0.2)
    assert np.linalg.norm(u12.values - u.values) / np.linalg.norm(u.values) < 1e-8


def test_friedrichs_matches_closed_form():
    grid = RadialGrid(16.0, 1024)
    t = build_transform(grid, FRIEDRICHS)
    a = 1.0
    f = gaussian_field(grid, a)
    for time in (0.2, 0.5):
        u = evolve_linear(f, t, time)
        exact = free_gaussian_reduced(grid.nodes, a, time)
        assert np.linalg.norm(u.values - exact) / np.linalg.norm(exact) < 1e-6


def test_commutation_with_fractional(transforms, rng):
    t = transforms[1.0]
    f = band_limited_field(t, rng, band=(0.08, 0.22))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = fractional_apply(evolve_linear(f, t, 0.15), t, 1.0)
        b = evolve_linear(fractional_apply(f, t, 1.0), t, 0.15)
    assert np.linalg.norm(a.values - b.values) / np.linalg.norm(a.values) < 1e-8


def test_decay_slope_friedrichs_gaussian_vs_oracle():
    grid = RadialGrid(24.0, 1536)
    t = build_transform(grid, FRIEDRICHS)
    a = 2.0
    f = gaussian_field(grid, a)
    times = np.geomspace(0.8, 1.9, 9)
    rep = dispersive_decay_experiment(f, t, 2.5, times)
    assert rep.passes
    # the numerically recorded norms track the closed form
    oracle = np.array([free_gaussian_lr_norm(a, tt, 2.5) for tt in times])
    assert np.max(np.abs(rep.norms - oracle) / oracle) < 1e-4
    oracle_slope = np.polyfit(np.log(times), np.log(oracle), 1)[0]
    assert rep.slope == pytest.approx(oracle_slope, abs=5e-4)


def test_decay_mass_conservation_r2():
    grid = RadialGrid(24.0, 1536)
    t = build_transform(grid, FRIEDRICHS)
    f = gaussian_field(grid, 2.0)
    rep = dispersive_decay_experiment(f, t, 2.0, np.geomspace(0.8, 1.9, 8))
    assert rep.target == 0.0
    assert abs(rep.slope) <= 0.01


def test_decay_window_error():
    grid = RadialGrid(12.0, 512)
    t = build_transform(grid, FRIEDRICHS)
    f = gaussian_field(grid, 2.0)
    with pytest.raises(WindowError), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dispersive_decay_experiment(f, t, 2.5, np.geomspace(0.5, 12.0, 8))


def test_strichartz_norm_basics(transforms, rng):
    t = transforms[1.0]
    f = band_limited_field(t, rng, band=(0.08, 0.2))
    times = np.linspace(0.0, 1.0, 9)
    states = [f] * 9                           # time-independent
    assert strichartz_norm((times, states), 2.0, 2.5) \
        == pytest.approx(lp_norm(f, 2.5), rel=1e-9)
    # (inf, 2): sup-in-time L^2 equals the initial mass for the linear flow
    short = np.linspace(0.02, 0.18, 8)
    states = [evolve_linear(f, t, tt) for tt in short]
    got = strichartz_norm((short, states), math.inf, 2.0)
    assert got == pytest.approx(lp_norm(f, 2), rel=1e-6)


def test_strichartz_constant_ensemble_stable():
    grid = RadialGrid(24.0, 1024)
    t = build_transform(grid, 1.0)
    fields = [gaussian_field(grid, a, amp) for a, amp in
              ((2.0, 1.0), (1.5, 0.7), (3.0, 1.2), (2.5, 0.5))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        consts = fitted_strichartz_constant(fields, t, 6.0, 18.0 / 7.0, t_end=1.5)
    assert all(math.isfinite(c) for c in consts)
    assert max(consts) / min(consts) < 1.1
