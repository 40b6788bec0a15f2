"""Command-line front end: experiment dispatch and report emission.

Exit codes: 0 success, 1 usage/configuration error, 2 physics-level failure
(blow-up flag, non-contraction, aliasing abort).  Failures also emit one
structured JSON diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._io import write_csv, write_json, write_svg_lines
from .config import COMMANDS, RunConfig, apply_key, parse_config, worker_count
from .errors import ConfigError, SingHartreeError
from .operator import FRIEDRICHS, PointInteraction
from .radial import RadialGrid, lp_norm
from .transform import build_transform, norm_equivalence_report, perturbed_norm
from .solver import SolverConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PHYSICS = 2


def _solver_config(cfg: RunConfig) -> SolverConfig:
    return SolverConfig(
        dt=cfg.dt, t_end=cfg.t_end, picard_tol=cfg.picard_tol,
        picard_max_iter=cfg.picard_max_iter, blowup_threshold=cfg.blowup_threshold,
        monitor_s=cfg.monitor_s,
        quadrature_nodes_per_window=cfg.nodes_per_window,
        store_every=cfg.store_every, lr_exponent=cfg.r_exponent)


def _setup(cfg: RunConfig):
    grid = RadialGrid(cfg.r_max, cfg.n)
    transform = build_transform(grid, cfg.alpha, k_max=cfg.k_max, n_k=cfg.n_k)
    datum = cfg.datum.realize(grid, alpha=cfg.alpha, lam=cfg.lam)
    potential = cfg.potential.realize(grid)
    return grid, transform, datum, potential


def _write_trajectory(cfg: RunConfig, traj, name: str):
    cols, data = traj.monitor_frame()
    out = Path(cfg.out_dir)
    write_csv(out / f"{name}.csv", cols, data, seed=cfg.seed)
    if cfg.svg:
        write_svg_lines(out / f"{name}.svg", traj.times,
                        {"mass": traj.monitors["mass"],
                         "energy": traj.monitors["energy"],
                         "h_s_norm": traj.monitors["h_s_norm"]},
                        title=f"{name} monitors")


def _warn_if_hypotheses_fail(w, s, transform):
    from .hartree import hypothesis_check
    import warnings as _w
    rep = hypothesis_check(w, s, transform)
    if not (rep.passed("mass-local") or rep.passed("intermediate-regularity")):
        _w.warn("potential fails every local solution-theory hypothesis at "
                f"s = {s}; proceeding anyway", stacklevel=2)


def _cmd_evolve(cfg: RunConfig) -> int:
    from .solver import evolve
    _, transform, f, w = _setup(cfg)
    _warn_if_hypotheses_fail(w, cfg.monitor_s, transform)
    traj = evolve(f, w, PointInteraction(cfg.alpha), _solver_config(cfg), transform)
    _write_trajectory(cfg, traj, "evolve")
    final = traj.final_state()
    write_csv(Path(cfg.out_dir) / "final_state.csv", ["r", "re", "im"],
              np.column_stack([final.grid.nodes, final.values.real,
                               final.values.imag]), seed=cfg.seed)
    write_json(Path(cfg.out_dir) / "evolve.json",
               {"termination": traj.termination,
                "t_final": float(traj.times[-1]),
                "mass_drift": float(abs(traj.monitors["mass"][-1]
                                        - traj.monitors["mass"][0])
                                    / traj.monitors["mass"][0])},
               seed=cfg.seed)
    return EXIT_OK if traj.termination == "completed" else EXIT_PHYSICS


def _cmd_picard(cfg: RunConfig) -> int:
    from .solver import picard_window, suggested_window
    _, transform, f, w = _setup(cfg)
    _warn_if_hypotheses_fail(w, cfg.monitor_s, transform)
    T = cfg.window or suggested_window(f, w, transform, s=cfg.monitor_s)
    res = picard_window(f, w, transform, T, _solver_config(cfg))
    _write_trajectory(cfg, res.trajectory, "picard")
    write_json(Path(cfg.out_dir) / "picard.json",
               {"window": T, "iterations": res.iterations,
                "final_update": res.final_update,
                "contraction_ratios": list(res.contraction_ratios)},
               seed=cfg.seed)
    return EXIT_OK


def _cmd_dispersive(cfg: RunConfig) -> int:
    from .propagator import dispersive_decay_experiment
    _, transform, f, _ = _setup(cfg)
    times = np.geomspace(cfg.t_start, cfg.t_end, cfg.samples)
    rep = dispersive_decay_experiment(f, transform, cfg.r_exponent, times)
    out = Path(cfg.out_dir)
    write_csv(out / "dispersive.csv", ["t", "lr_norm"],
              np.column_stack([rep.times, rep.norms]), seed=cfg.seed)
    write_json(out / "dispersive.json",
               {"r": rep.r, "slope": rep.slope, "target": rep.target,
                "rel_error": rep.rel_error(), "passes": rep.passes}, seed=cfg.seed)
    if cfg.svg:
        write_svg_lines(out / "dispersive.svg", np.log(rep.times),
                        {"log L^r": np.log(rep.norms)},
                        title=f"decay fit r={rep.r:.3f}")
    return EXIT_OK if rep.passes else EXIT_PHYSICS


def _cmd_norms(cfg: RunConfig) -> int:
    from .hartree import hypothesis_check
    from .radial import decompose
    from .sampling import domain_element, philox_rng
    _, transform, f, w = _setup(cfg)
    report = {
        "datum_l2": lp_norm(f, 2),
        "datum_perturbed": math.sqrt(4 * math.pi) * perturbed_norm(f, transform, cfg.s),
        "completeness_defect": transform.completeness_defect,
    }
    if cfg.alpha is not FRIEDRICHS and float(cfg.alpha) >= 0:
        rng = philox_rng(cfg.seed)
        samples = [decompose(domain_element(transform.grid, rng,
                                            float(cfg.alpha), cfg.lam), cfg.lam)
                   for _ in range(6)]
        band = norm_equivalence_report(samples, transform, cfg.s)
        report["equivalence_band"] = {"min": band.ratio_min, "max": band.ratio_max,
                                      "regime": band.regime}
    report["hypotheses"] = hypothesis_check(w, cfg.s, transform).as_dict()
    write_json(Path(cfg.out_dir) / "norms.json", report, seed=cfg.seed)
    return EXIT_OK


def _cmd_stability(cfg: RunConfig) -> int:
    from .solver import stability_experiment
    _, transform, f, w = _setup(cfg)
    rows = []
    for mode in ("f", "w"):
        for row in stability_experiment(f, w, PointInteraction(cfg.alpha),
                                        cfg.perturbation_scales, _solver_config(cfg),
                                        transform, mode=mode, seed=cfg.seed):
            rows.append([row.mode, row.scale, row.sup_l2, row.sup_hs, row.l2_rate])
    write_csv(Path(cfg.out_dir) / "stability.csv",
              ["mode", "eps", "sup_l2", "sup_hs", "l2_rate"], rows, seed=cfg.seed)
    return EXIT_OK


def _cmd_globalize(cfg: RunConfig) -> int:
    from .solver import globalization_check
    _, transform, f, w = _setup(cfg)
    rep = globalization_check(f, w, PointInteraction(cfg.alpha), cfg.t_end,
                              _solver_config(cfg), transform, mass_sweep=3)
    write_json(Path(cfg.out_dir) / "globalize.json",
               {"bound": rep.bound, "sup_hs": rep.sup_hs,
                "energy_inequality_ok": rep.energy_inequality_ok,
                "worst_energy_gap": rep.worst_energy_gap,
                "mass_sweep": [{"mass": m, "bounded": b} for m, b in rep.mass_sweep]},
               seed=cfg.seed)
    return EXIT_OK if rep.energy_inequality_ok else EXIT_PHYSICS


def _cmd_check_hypotheses(cfg: RunConfig) -> int:
    from .hartree import hypothesis_check
    _, transform, _, w = _setup(cfg)
    rep = hypothesis_check(w, cfg.s, transform)
    write_json(Path(cfg.out_dir) / "hypotheses.json", rep.as_dict(), seed=cfg.seed)
    return EXIT_OK


def run(cfg: RunConfig) -> int:
    """Dispatch a validated configuration; returns the process exit code."""
    cfg.validate()
    dispatch = {
        "evolve": _cmd_evolve,
        "picard": _cmd_picard,
        "dispersive": _cmd_dispersive,
        "norms": _cmd_norms,
        "stability": _cmd_stability,
        "globalize": _cmd_globalize,
        "check-hypotheses": _cmd_check_hypotheses,
        "selftest": lambda c: selftest(c),
    }
    return dispatch[cfg.command](cfg)


# ----------------------------------------------------------------------
# selftest
# ----------------------------------------------------------------------

def selftest(cfg: RunConfig) -> int:
    """Fast deterministic invariant battery; writes selftest_report.json and
    selftest.csv (byte-identical across runs with the same seed)."""
    from . import selftest as _st
    report = _st.run_selftest(seed=cfg.seed)
    out = Path(cfg.out_dir)
    write_json(out / "selftest_report.json", report, seed=cfg.seed)
    rows = [[name, int(res["passed"]), res["detail"]]
            for name, res in sorted(report["suites"].items())]
    write_csv(out / "selftest.csv", ["suite", "passed", "detail"], rows, seed=cfg.seed)
    n_fail = sum(1 for r in report["suites"].values() if not r["passed"])
    print(f"selftest: {len(report['suites']) - n_fail}/{len(report['suites'])} suites passed")
    return EXIT_OK if n_fail == 0 else EXIT_PHYSICS


# ----------------------------------------------------------------------
# argument handling
# ----------------------------------------------------------------------

def _split_overrides(argv):
    """Pull `--namespace.key value` pairs out of argv (they mirror config
    keys and are applied after the file)."""
    rest, overrides = [], []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "." in tok:
            key = tok[2:]
            if "=" in key:
                key, val = key.split("=", 1)
            else:
                i += 1
                if i >= len(argv):
                    raise ConfigError(f"flag {tok} needs a value")
                val = argv[i]
            overrides.append((key, val))
        else:
            rest.append(tok)
        i += 1
    return rest, overrides


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        rest, overrides = _split_overrides(argv)
    except ConfigError as exc:
        _emit_error(exc)
        return EXIT_USAGE
    parser = argparse.ArgumentParser(
        prog="singhartree",
        description="Simulator and verification workbench for the 3D Hartree "
                    "equation with a contact interaction at the origin")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("-c", "--config", help="configuration file (key = value lines)")
    parser.add_argument("--out", help="output directory (same as --output.dir)")
    parser.add_argument("--version", action="version", version=__version__)
    args = parser.parse_args(rest)
    try:
        cfg = RunConfig()
        if args.config:
            text = Path(args.config).read_text()
            cfg = parse_config(text, base=cfg)
        cfg.command = args.command
        if args.out:
            cfg.out_dir = args.out
        for key, val in overrides:
            apply_key(cfg, key, val)
        cfg.validate()
        return run(cfg)
    except ConfigError as exc:
        _emit_error(exc)
        return EXIT_USAGE
    except (SingHartreeError,) as exc:
        _emit_error(exc)
        return EXIT_PHYSICS


def _emit_error(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        if exc.line is not None:
            payload["line"] = exc.line
        if exc.key is not None:
            payload["key"] = exc.key
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
