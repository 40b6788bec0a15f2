"""Acceptance gate: each criterion runs at its stated tolerance and prints a
pass/fail line.  Run with `pytest tests/test_acceptance.py -v -s`.

The heavier criteria (5, 7, 10) take a few minutes each; the whole module
stays within a coffee break on a laptop.
"""

import math
import subprocess
import sys
import warnings

import numpy as np

from singhartree import (
    FRIEDRICHS,
    PlainRadialField,
    PointInteraction,
    Potential,
    RadialGrid,
    ReducedField,
    SolverConfig,
    apply_operator,
    build_transform,
    decompose,
    dispersive_decay_experiment,
    evolve,
    forward,
    free_limit_check,
    globalization_check,
    green_profile,
    inverse,
    lp_norm,
    perturbed_norm,
    picard_window,
    quadratic_form,
    radial_convolve,
    spectrum,
    stability_experiment,
    suggested_window,
)
from singhartree.radial import FOUR_PI
from singhartree.sampling import (band_limited_field, gaussian_field,
                                  gaussian_potential, philox_rng)

from oracles import brute_force_convolution

warnings.filterwarnings("ignore")


def report(num, name, ok, detail):
    print(f"\n[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'}  ({detail})")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_01_closed_form_anchors():
    grid = RadialGrid(12.0, 1024)
    G1 = green_profile(1.0, grid)
    m_err = abs(lp_norm(G1, 2) ** 2 - 1 / (8 * math.pi)) * 8 * math.pi
    q = quadratic_form(decompose(G1, 1.0), PointInteraction(0.0))
    q_err = abs(q - 1 / (8 * math.pi)) * 8 * math.pi
    ev = spectrum(PointInteraction(-1.0 / FOUR_PI)).eigenvalue
    ev_err = abs(ev + 1.0)
    psi_b = ReducedField(grid, np.exp(-grid.nodes))
    out = apply_operator(psi_b, PointInteraction(-1.0 / FOUR_PI), lam=4.0)
    eig_res = float(np.linalg.norm(out.values + psi_b.values)
                    / np.linalg.norm(psi_b.values))
    ok = m_err < 1e-6 and q_err < 1e-6 and ev_err < 1e-6 and eig_res < 1e-6
    report(1, "closed-form anchors", ok,
           f"mass {m_err:.1e}, form {q_err:.1e}, eigenvalue {ev_err:.1e}, "
           f"eigenpair residual {eig_res:.1e}")


def test_criterion_02_convolution_oracle():
    grid = RadialGrid(12.0, 768)
    rng = philox_rng(42)
    worst = 0.0
    for _ in range(10):
        params = [[(rng.uniform(0.2, 1.0) * rng.choice([-1, 1]),
                    rng.uniform(0.6, 1.4), rng.uniform(0.0, 2.0))
                   for _ in range(2)] for _ in range(2)]
        funcs = [lambda r, ps=ps: sum(a * np.exp(-((r - c) / wd) ** 2)
                                      for a, wd, c in ps) for ps in params]
        ours = radial_convolve(PlainRadialField(grid, funcs[0](grid.nodes)),
                               PlainRadialField(grid, funcs[1](grid.nodes)))
        radii = np.linspace(0.3, 5.0, 9)
        oracle = brute_force_convolution(funcs[0], funcs[1], radii,
                                         box=9.0, n_cells=96)
        got = np.interp(radii, grid.nodes, ours.values.real)
        worst = max(worst, float(np.max(np.abs(got - oracle))
                                 / np.max(np.abs(oracle))))
    w = PlainRadialField(grid, np.exp(-grid.nodes ** 2))
    conv = radial_convolve(w, w)
    exact = (math.pi / 2) ** 1.5 * np.exp(-grid.nodes ** 2 / 2)
    g_err = float(np.max(np.abs(conv.values.real - exact)) / exact.max())
    ok = worst < 1e-4 and g_err < 1e-6
    report(2, "convolution vs 3D brute force", ok,
           f"10-pair worst {worst:.2e} (tol 1e-4), gaussian {g_err:.2e} (tol 1e-6)")


def test_criterion_03_transform_unitarity(transforms):
    rng = philox_rng(7)
    worst_rt = worst_par = 0.0
    for alpha in (0.0, 0.1, 1.0, FRIEDRICHS):
        t = transforms[alpha]
        for _ in range(4):
            f = band_limited_field(t, rng, band=(0.08, 0.3))
            F = forward(f, t)
            back = inverse(F)
            worst_rt = max(worst_rt, float(
                np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values)))
            l2sq = t.halfline_l2(f.values) ** 2
            worst_par = max(worst_par, abs(F.parseval_mass() - l2sq) / l2sq)
    ok = worst_rt < 1e-8 and worst_par < 1e-6
    report(3, "transform unitarity/completeness", ok,
           f"round-trip {worst_rt:.2e} (tol 1e-8), Parseval {worst_par:.2e} (tol 1e-6)")


def test_criterion_04_boundary_conditions():
    from singhartree import bethe_peierls_residual, tms_residual
    grid_bp = RadialGrid(12.0, 8192)
    r = grid_bp.nodes
    alpha = 1.0 / FOUR_PI
    kappa = 1.0 / (alpha + 1.0 / FOUR_PI)
    psi = ReducedField(grid_bp, r * np.exp(-r ** 2) + kappa * np.exp(-r) / FOUR_PI)
    fit = bethe_peierls_residual(psi, PointInteraction(alpha))
    bp_err = abs(fit.a - (-1.0 / (FOUR_PI * alpha)))
    grid_t = RadialGrid(12.0, 2048)
    rt = grid_t.nodes
    kap = 1.0 / (1.0 + 1.0 / FOUR_PI)
    psi_t = ReducedField(grid_t, rt * np.exp(-rt ** 2) + kap * np.exp(-rt) / FOUR_PI)
    tms = tms_residual(psi_t, PointInteraction(1.0), np.linspace(15.0, 40.0, 11))
    tms_rel = abs(tms.ratio - 2 * math.pi ** 2) / (2 * math.pi ** 2)
    ok = bp_err < 0.01 and tms_rel < 0.05
    report(4, "Bethe-Peierls / TMS boundary conditions", ok,
           f"scattering length err {bp_err:.2e} (tol 0.01), "
           f"TMS ratio rel {tms_rel:.2%} (tol 5%)")


def test_criterion_05_dispersive_decay():
    grid = RadialGrid(28.0, 1792)
    f = gaussian_field(grid, a=2.0)
    times = np.geomspace(0.8, 1.9, 9)
    details = []
    ok = True
    for alpha in (0.0, 1.0):
        t = build_transform(grid, alpha)
        for r in (2.2, 2.5, 18.0 / 7.0):
            rep = dispersive_decay_experiment(f, t, r, times)
            details.append(f"a={alpha} r={r:.2f}: {rep.rel_error():.1%}")
            ok = ok and rep.passes
    report(5, "dispersive decay slopes", ok, "; ".join(details) + " (tol 5%)")


def test_criterion_06_perturbed_space_contrast():
    vals_pert, vals_free = {}, {}
    for n in (512, 1024):
        grid = RadialGrid(12.0, n)
        t = build_transform(grid, 0.0)
        free = build_transform(grid, FRIEDRICHS)
        G = green_profile(1.0, grid)
        for s in (0.75, 1.0, 1.25):
            vals_pert.setdefault(s, []).append(perturbed_norm(G, t, s))
            vals_free.setdefault(s, []).append(perturbed_norm(G, free, s))
    det = []
    ok = True
    for s in (0.75, 1.0, 1.25):
        a, b = vals_pert[s]
        c, d = vals_free[s]
        stable = abs(b - a) / a
        growth = d / c
        det.append(f"s={s}: pert {stable:.1%}, free x{growth:.2f}")
        ok = ok and stable < 0.06 and growth > 1.15
    report(6, "perturbed-vs-classical contrast witness", ok, "; ".join(det))


def test_criterion_07_conservation():
    grid = RadialGrid(28.0, 1280)
    t = build_transform(grid, 1.0)
    f = gaussian_field(grid, a=1.0 / 16.0, amplitude=0.8)
    w = gaussian_potential(grid, 0.5, 0.8)
    drifts = {}
    mass_worst = 0.0
    complete = True
    for dt in (2e-3, 1e-3):
        traj = evolve(f, w, PointInteraction(1.0), SolverConfig(dt=dt, t_end=5.0), t)
        e, m = traj.monitors["energy"], traj.monitors["mass"]
        drifts[dt] = float(np.max(np.abs(e - e[0])))
        mass_worst = max(mass_worst, float(abs(m[-1] - m[0]) / m[0]))
        complete = complete and traj.termination == "completed"
    order = math.log2(drifts[2e-3] / drifts[1e-3])
    ok = mass_worst < 1e-8 and 1.8 <= order <= 2.2 and complete
    report(7, "mass/energy conservation", ok,
           f"mass drift {mass_worst:.2e} (tol 1e-8); energy drift "
           f"{drifts[1e-3]:.2e} at dt=1e-3, halving order {order:.2f} (2.0 +/- 0.2)")


def test_criterion_08_picard_strang_cross_validation():
    grid = RadialGrid(20.0, 512)
    t = build_transform(grid, 1.0)
    f = gaussian_field(grid, a=1.0 / 16.0, amplitude=0.5)
    w = gaussian_potential(grid, 1.0, 0.5)
    dt, K = 1e-3, 16
    T = suggested_window(f, w, t, s=1.0)
    T = max(1, round(T / (K * 20 * dt))) * K * 20 * dt
    cfg = SolverConfig(dt=dt, t_end=T, picard_tol=1e-6,
                       quadrature_nodes_per_window=K)
    res = picard_window(f, w, t, T, cfg)
    ratios_ok = all(rho <= 0.5 for rho in res.contraction_ratios)
    strang = evolve(f, w, PointInteraction(1.0),
                    SolverConfig(dt=dt, t_end=T, store_every=round(T / K / dt)), t)
    worst = 0.0
    for tp, up in zip(res.trajectory.times, res.trajectory.states):
        i = int(np.argmin(np.abs(strang.state_times - tp)))
        worst = max(worst, lp_norm(up - strang.states[i], 2))
    ok = ratios_ok and worst < 1e-4
    report(8, "Picard/Strang cross-validation", ok,
           f"window {T:.3f}, max ratio "
           f"{max(res.contraction_ratios):.3f} (<= 0.5), sup diff {worst:.2e} (tol 1e-4)")


def test_criterion_09_stability():
    grid = RadialGrid(20.0, 512)
    t = build_transform(grid, 1.0)
    f = gaussian_field(grid, a=1.0 / 16.0, amplitude=0.5)
    w = gaussian_potential(grid, 1.0, 0.5)
    cfg = SolverConfig(dt=2e-3, t_end=0.6)
    det = []
    ok = True
    for mode in ("f", "w"):
        rows = stability_experiment(f, w, PointInteraction(1.0),
                                    (1e-2, 1e-3, 1e-4), cfg, t, mode=mode)
        rates = [r.l2_rate for r in rows]
        spread = max(rates) / min(rates)
        det.append(f"{mode}: err/eps in [{min(rates):.3f}, {max(rates):.3f}] x{spread:.2f}")
        ok = ok and spread < 3.0
    report(9, "first-order stability", ok, "; ".join(det) + " (factor 3)")


def test_criterion_10_globalization():
    grid = RadialGrid(44.0, 1280)
    t = build_transform(grid, 1.0)
    f = gaussian_field(grid, a=1.0 / 32.0, amplitude=0.25)
    w = gaussian_potential(grid, 0.5, 0.5)
    rep = globalization_check(f, w, PointInteraction(1.0), 20.0,
                              SolverConfig(dt=8e-3, t_end=20.0), t)
    ok = rep.energy_inequality_ok and rep.sup_hs <= 1.1 * rep.bound
    report(10, "energy-space globalization", ok,
           f"(1/2)form<=E gap {rep.worst_energy_gap:.2e} (tol 1e-8); "
           f"sup H1 {rep.sup_hs:.4f} vs bound {rep.bound:.4f} (within 10%)")


def test_criterion_11_free_limit():
    grid = RadialGrid(20.0, 512)
    f = gaussian_field(grid, a=1.0 / 16.0, amplitude=0.5)
    w = Potential(PlainRadialField(grid, np.zeros(grid.n + 1)))
    devs = free_limit_check(f, w, (1.0, 10.0, 100.0), 1.0,
                            SolverConfig(dt=2e-3, t_end=1.0))
    vals = [d for _, d in devs]
    ok = vals[0] > vals[1] > vals[2] > 1e-8
    report(11, "Friedrichs free limit", ok,
           "deviations " + " > ".join(f"{v:.2e}" for v in vals))


def test_criterion_12_determinism(tmp_path):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        res = subprocess.run([sys.executable, "-m", "singhartree.cli",
                              "selftest", "--out", str(out)],
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        outs.append(out)
    same_json = (outs[0] / "selftest_report.json").read_bytes() \
        == (outs[1] / "selftest_report.json").read_bytes()
    same_csv = (outs[0] / "selftest.csv").read_bytes() \
        == (outs[1] / "selftest.csv").read_bytes()
    ok = same_json and same_csv
    report(12, "byte-identical determinism", ok,
           f"selftest json identical: {same_json}, csv identical: {same_csv}")
