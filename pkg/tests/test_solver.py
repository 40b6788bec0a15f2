import math

import numpy as np
import pytest

from singhartree import (
    NonContractionError,
    PlainRadialField,
    PointInteraction,
    Potential,
    RadialGrid,
    ReducedField,
    SolverConfig,
    build_transform,
    evolve,
    free_limit_check,
    globalization_check,
    lp_norm,
    picard_window,
    stability_experiment,
    strang_step,
    suggested_window,
)
from singhartree.errors import IterationCapError
from singhartree.solver import reverse_check
from singhartree.sampling import gaussian_field, gaussian_potential


@pytest.fixture(scope="module")
def setup():
    grid = RadialGrid(20.0, 512)
    transform = build_transform(grid, 1.0)
    f = gaussian_field(grid, a=1.0 / 16.0, amplitude=0.5)
    w = gaussian_potential(grid, 1.0, 0.5)
    return grid, transform, f, w


def zero_potential(grid):
    return Potential(PlainRadialField(grid, np.zeros(grid.n + 1)))


def test_strang_zero_w_is_linear(setup):
    grid, t, f, _ = setup
    out = strang_step(f, zero_potential(grid), t, 1e-2)
    lin = ReducedField(grid, t.evolve_values(f.values.astype(complex), 1e-2))
    assert np.linalg.norm(out.values - lin.values) \
        / np.linalg.norm(lin.values) < 1e-13


def test_strang_dt_zero_identity(setup):
    grid, t, f, w = setup
    out = strang_step(f, w, t, 0.0)
    assert np.linalg.norm(out.values - f.values) / np.linalg.norm(f.values) < 1e-13


def test_strang_self_convergence_second_order(setup):
    grid, t, f, w = setup
    op = PointInteraction(1.0)
    ref = evolve(f, w, op, SolverConfig(dt=2.5e-4, t_end=0.4), t).final_state()
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        u = evolve(f, w, op, SolverConfig(dt=dt, t_end=0.4), t).final_state()
        errs.append(lp_norm(u - ref, 2))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    for o in orders:
        assert 1.8 < o < 2.2


def test_evolve_linear_case_conserves(setup):
    grid, t, f, _ = setup
    traj = evolve(f, zero_potential(grid), PointInteraction(1.0),
                  SolverConfig(dt=2e-3, t_end=0.5), t)
    m = traj.monitors["mass"]
    assert abs(m[-1] - m[0]) / m[0] < 1e-10
    # trajectory equals the one-shot linear flow of the same calculus
    lin = t.evolve_values(f.values.astype(complex), 0.5)
    d = np.linalg.norm(traj.final_state().values - lin) / np.linalg.norm(lin)
    assert d < 1e-10
    # H~^1 monitor exactly constant under the linear flow
    hs = traj.monitors["h_s_norm"]
    assert np.max(np.abs(hs - hs[0])) / hs[0] < 1e-10


def test_evolve_records_and_termination(setup):
    grid, t, f, w = setup
    traj = evolve(f, w, PointInteraction(1.0), SolverConfig(dt=2e-3, t_end=0.2), t)
    assert traj.termination == "completed"
    assert traj.times[0] == 0.0
    assert np.all(np.diff(traj.times) > 0)
    assert np.linalg.norm(traj.states[0].values - f.values) == 0.0
    cols, data = traj.monitor_frame()
    assert cols == ["t", "mass", "energy", "h_s_norm", "l2_norm", "lr_norm",
                    "tail_mass"]
    assert data.shape == (len(traj.times), 7)


def test_evolve_backward_time(setup):
    grid, t, f, w = setup
    back = evolve(f, w, PointInteraction(1.0), SolverConfig(dt=2e-3, t_end=-0.2), t)
    assert back.times[-1] == pytest.approx(-0.2)
    fwd = evolve(back.final_state(), w, PointInteraction(1.0),
                 SolverConfig(dt=2e-3, t_end=0.2), t)
    assert lp_norm(fwd.final_state() - f, 2) / lp_norm(f, 2) < 1e-10


def test_time_reversibility(setup):
    grid, t, f, w = setup
    assert reverse_check(f, w, t, 2e-3, 100) < 1e-8


def test_blowup_flag():
    grid = RadialGrid(20.0, 256)
    t = build_transform(grid, 0.0)
    f = gaussian_field(grid, 0.5, 3.0)
    w = gaussian_potential(grid, 1.0, 1.0)
    cfg = SolverConfig(dt=1e-3, t_end=1.0, blowup_threshold=1e-6)  # absurd cap
    traj = evolve(f, w, PointInteraction(0.0), cfg, t)
    assert traj.termination == "blowup_flag"
    assert traj.monitors["h_s_norm"][-1] > cfg.blowup_threshold
    assert traj.times[-1] < 1.0


def test_alpha_negative_refused(setup):
    grid, t, f, w = setup
    with pytest.raises(ValueError):
        evolve(f, w, PointInteraction(-0.5), SolverConfig(dt=1e-3, t_end=0.1))


def test_picard_zero_w_one_iteration(setup):
    grid, t, f, _ = setup
    res = picard_window(f, zero_potential(grid), t, 0.3,
                        SolverConfig(dt=1e-3, t_end=0.3, picard_tol=1e-10))
    assert res.iterations == 1
    # window nodes match the linear flow exactly
    lin = t.evolve_values(f.values.astype(complex), 0.3)
    d = np.linalg.norm(res.trajectory.final_state().values - lin)
    assert d / np.linalg.norm(lin) < 1e-12


def test_picard_contraction_and_strang_agreement(setup):
    grid, t, f, w = setup
    T = suggested_window(f, w, t, s=1.0)
    # snap the window to a multiple of 20 dt for state alignment
    dt = 1e-3
    K = 16
    T = max(1, round(T / (K * 20 * dt))) * K * 20 * dt
    cfg = SolverConfig(dt=dt, t_end=T, picard_tol=1e-6,
                       quadrature_nodes_per_window=K)
    res = picard_window(f, w, t, T, cfg)
    assert all(r <= 0.5 for r in res.contraction_ratios)
    strang = evolve(f, w, PointInteraction(1.0),
                    SolverConfig(dt=dt, t_end=T, store_every=round(T / K / dt)), t)
    worst = 0.0
    for tp, up in zip(res.trajectory.times, res.trajectory.states):
        i = int(np.argmin(np.abs(strang.state_times - tp)))
        assert abs(strang.state_times[i] - tp) < 1e-12
        worst = max(worst, lp_norm(up - strang.states[i], 2))
    assert worst < 1e-4


def test_picard_noncontraction_error(setup):
    grid, t, f, w = setup
    big_f = 6.0 * f
    with pytest.raises((NonContractionError, IterationCapError)):
        picard_window(big_f, Potential(w.profile * 40.0), t, 4.0,
                      SolverConfig(dt=1e-3, t_end=4.0, picard_tol=1e-10,
                                   picard_max_iter=25))


def test_stability_first_order(setup):
    grid, t, f, w = setup
    cfg = SolverConfig(dt=4e-3, t_end=0.4)
    for mode in ("f", "w"):
        rows = stability_experiment(f, w, PointInteraction(1.0),
                                    (1e-2, 1e-3, 1e-4), cfg, t, mode=mode)
        assert rows[0].sup_l2 > 0
        rates = [r.l2_rate for r in rows]
        assert max(rates) / min(rates) < 3.0


def test_stability_zero_perturbation(setup):
    grid, t, f, w = setup
    rows = stability_experiment(f, w, PointInteraction(1.0), (0.0,),
                                SolverConfig(dt=4e-3, t_end=0.2), t)
    assert rows[0].sup_l2 == 0.0


def test_globalization_inequality(setup):
    grid, t, f, w = setup
    rep = globalization_check(f, w, PointInteraction(1.0), 2.0,
                              SolverConfig(dt=2e-3, t_end=2.0), t, mass_sweep=2)
    assert rep.energy_inequality_ok
    assert rep.sup_hs <= 1.1 * rep.bound
    assert all(bounded for _, bounded in rep.mass_sweep)


def test_free_limit_monotone(setup):
    grid, _, f, _ = setup
    devs = free_limit_check(f, zero_potential(grid), (1.0, 10.0, 100.0), 0.5,
                            SolverConfig(dt=2e-3, t_end=0.5))
    vals = [d for _, d in devs]
    assert vals[0] > vals[1] > vals[2] > 1e-8
