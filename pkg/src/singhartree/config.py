"""Run configuration: `key = value` text files with namespaced keys, datum /
potential specs, and validation.

Keys live in four namespaces (grid.*, physics.*, solver.*, output.*); unknown
keys are hard errors so typos cannot silently fall back to defaults.  CLI
flags mirror the keys (`--physics.alpha 0.5` overrides file values).
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .operator import FRIEDRICHS
from .radial import PlainRadialField, Potential, RadialGrid, ReducedField

COMMANDS = ("evolve", "picard", "dispersive", "norms", "stability",
            "globalize", "check-hypotheses", "selftest")


def worker_count() -> int:
    """Worker cap for parameter sweeps (SH_THREADS, default cpu count)."""
    env = os.environ.get("SH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1

_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


@dataclass(frozen=True)
class DatumSpec:
    """Initial-datum recipe: gaussian(width, amplitude), green(lambda),
    domain_gaussian(width, amplitude) [charge-linked at the run's alpha,
    lambda], or file(path) with CSV columns r, re, im."""

    kind: str
    params: tuple

    def realize(self, grid: RadialGrid, alpha=None, lam: float = 1.0) -> ReducedField:
        r = grid.nodes
        if self.kind == "gaussian":
            width, amp = self.params
            return ReducedField(grid, amp * r * np.exp(-((r / width) ** 2)))
        if self.kind == "green":
            (lam_g,) = self.params
            return ReducedField(grid, np.exp(-math.sqrt(lam_g) * r) / (4 * math.pi))
        if self.kind == "domain_gaussian":
            width, amp = self.params
            if alpha is None or alpha is FRIEDRICHS:
                raise ConfigError("domain_gaussian needs a finite alpha")
            kappa = amp / (alpha + math.sqrt(lam) / (4 * math.pi))
            f = amp * r * np.exp(-((r / width) ** 2)) \
                + kappa * np.exp(-math.sqrt(lam) * r) / (4 * math.pi)
            return ReducedField(grid, f)
        if self.kind == "file":
            (path,) = self.params
            data = np.loadtxt(path, delimiter=",", skiprows=1)
            re_v = np.interp(grid.nodes, data[:, 0], data[:, 1])
            im_v = np.interp(grid.nodes, data[:, 0], data[:, 2]) if data.shape[1] > 2 else 0.0
            return ReducedField(grid, re_v + 1j * im_v)
        raise ConfigError(f"unknown datum kind {self.kind!r}")


@dataclass(frozen=True)
class PotentialSpec:
    """Potential recipe: gaussian(width, amplitude), green(lambda) [capped at
    the first node], ball_indicator(radius), inverse_power(gamma, cutoff)
    [r^-gamma capped below cutoff and truncated at 0.8 r_max], or file(path)
    with CSV columns r, w."""

    kind: str
    params: tuple

    def realize(self, grid: RadialGrid) -> Potential:
        r = grid.nodes
        if self.kind == "gaussian":
            width, amp = self.params
            vals = amp * np.exp(-((r / width) ** 2))
        elif self.kind == "green":
            (lam_g,) = self.params
            vals = np.exp(-math.sqrt(lam_g) * r) / (4 * math.pi * np.maximum(r, 0.5 * grid.h))
        elif self.kind == "ball_indicator":
            (radius,) = self.params
            vals = (r <= radius).astype(float)
        elif self.kind == "inverse_power":
            gamma, cutoff = self.params
            vals = np.maximum(r, cutoff) ** (-gamma)
            vals[r > 0.8 * grid.r_max] = 0.0
        elif self.kind == "file":
            (path,) = self.params
            data = np.loadtxt(path, delimiter=",", skiprows=1)
            vals = np.interp(grid.nodes, data[:, 0], data[:, 1])
        elif self.kind == "zero":
            vals = np.zeros(grid.n + 1)
        else:
            raise ConfigError(f"unknown potential kind {self.kind!r}")
        return Potential(PlainRadialField(grid, vals))


def _parse_spec(text: str, which: str):
    text = text.strip()
    if text in ("zero", "none", "0"):
        return PotentialSpec("zero", ()) if which == "potential" else None
    m = _SPEC_RE.match(text)
    if not m:
        raise ConfigError(f"malformed {which} spec {text!r}")
    kind, arg_text = m.group(1), m.group(2)
    args = []
    for tok in filter(None, (s.strip() for s in arg_text.split(","))):
        if kind == "file":
            args.append(tok)
        else:
            args.append(float(tok))
    cls = DatumSpec if which == "datum" else PotentialSpec
    if kind == "file" and not Path(args[0]).exists():
        raise ConfigError(f"{which} file {args[0]!r} does not exist", key=kind)
    return cls(kind, tuple(args))


@dataclass
class RunConfig:
    command: str = "selftest"
    # grid
    r_max: float = 20.0
    n: int = 512
    k_max: float | None = None
    n_k: int | None = None
    # physics
    alpha: object = 1.0          # float or FRIEDRICHS
    lam: float = 1.0
    s: float = 1.0
    r_exponent: float = 2.5
    datum: DatumSpec = field(default_factory=lambda: DatumSpec("gaussian", (4.0, 0.5)))
    potential: PotentialSpec = field(default_factory=lambda: PotentialSpec("gaussian", (1.0, 0.5)))
    # solver
    dt: float = 1e-3
    t_end: float = 1.0
    t_start: float = 0.1
    samples: int = 9
    picard_tol: float = 1e-6
    picard_max_iter: int = 40
    window: float | None = None
    nodes_per_window: int = 16
    blowup_threshold: float | None = None
    monitor_s: float = 1.0
    store_every: int | None = None
    perturbation_scales: tuple = (1e-2, 1e-3, 1e-4)
    # output
    out_dir: str = "out"
    seed: int = 20240817
    svg: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.r_max <= 0 or self.n < 16 or self.n % 2:
            raise ConfigError("grid needs r_max > 0 and even n >= 16")
        if self.dt <= 0:
            raise ConfigError("solver.dt must be positive", key="solver.dt")
        if self.lam <= 0:
            raise ConfigError("physics.lambda must be positive", key="physics.lambda")
        if abs(self.s - 0.5) < 1e-12 or abs(self.s - 1.5) < 1e-12:
            raise ConfigError(
                f"physics.s = {self.s} is a transition regularity", key="physics.s")
        if not 0.0 <= self.s <= 2.0:
            raise ConfigError("physics.s must lie in [0, 2]", key="physics.s")
        if self.command in ("evolve", "picard", "stability", "globalize") \
                and self.alpha is not FRIEDRICHS and float(self.alpha) < 0:
            raise ConfigError("evolution commands need alpha >= 0", key="physics.alpha")
        if self.command == "dispersive" and not 2.0 <= self.r_exponent < 3.0:
            raise ConfigError("physics.r must lie in [2, 3)", key="physics.r")
        if self.picard_tol <= 0:
            raise ConfigError("solver.picard_tol must be positive", key="solver.picard_tol")
        return self


_KEY_SETTERS = {
    "grid.r_max": ("r_max", float),
    "grid.n": ("n", int),
    "grid.k_max": ("k_max", float),
    "grid.n_k": ("n_k", int),
    "physics.alpha": ("alpha", lambda v: FRIEDRICHS if v.strip().lower() == "friedrichs" else float(v)),
    "physics.lambda": ("lam", float),
    "physics.s": ("s", float),
    "physics.r": ("r_exponent", float),
    "physics.datum": ("datum", lambda v: _parse_spec(v, "datum")),
    "physics.potential": ("potential", lambda v: _parse_spec(v, "potential")),
    "solver.dt": ("dt", float),
    "solver.t_end": ("t_end", float),
    "solver.t_start": ("t_start", float),
    "solver.samples": ("samples", int),
    "solver.picard_tol": ("picard_tol", float),
    "solver.picard_max_iter": ("picard_max_iter", int),
    "solver.window": ("window", float),
    "solver.nodes_per_window": ("nodes_per_window", int),
    "solver.blowup_threshold": ("blowup_threshold", float),
    "solver.monitor_s": ("monitor_s", float),
    "solver.store_every": ("store_every", int),
    "solver.perturbation_scales": ("perturbation_scales",
                                   lambda v: tuple(float(x) for x in v.split())),
    "output.dir": ("out_dir", str),
    "output.seed": ("seed", int),
    "output.svg": ("svg", lambda v: v.strip().lower() in ("1", "true", "yes")),
}


def apply_key(cfg: RunConfig, key: str, value: str, line: int | None = None):
    if key == "command":
        cfg.command = value.strip()
        return
    try:
        attr, conv = _KEY_SETTERS[key]
    except KeyError:
        raise ConfigError(f"unknown configuration key {key!r}", line=line, key=key) from None
    try:
        setattr(cfg, attr, conv(value))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})",
                          line=line, key=key) from None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse `key = value` lines (# comments) into a validated RunConfig."""
    cfg = base if base is not None else RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        apply_key(cfg, key, value, line=lineno)
    return cfg.validate()
