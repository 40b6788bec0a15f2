"""Deterministic CSV / JSON / SVG emission.

Every file starts with a comment header recording the seed; floats print
through repr (shortest round-trip) so identical runs are byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def write_csv(path, columns, rows, seed=None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if seed is not None:
        lines.append(f"# seed={seed}")
    lines.append(",".join(columns))
    for row in np.atleast_2d(rows):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if math.isnan(x) else x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, payload: dict, seed=None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if seed is not None:
        body["seed"] = seed
    path.write_text(json.dumps(_jsonable(body), indent=1, sort_keys=True) + "\n")


def write_svg_lines(path, x, series: dict, title: str = "",
                    logy: bool = False, size=(720, 420)) -> None:
    """Minimal standalone SVG line plot (no plotting dependency)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    W, H = size
    ml, mr, mt, mb = 60, 20, 30, 40
    x = np.asarray(x, dtype=float)
    names = list(series)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    if logy:
        ys = {k: np.log10(np.maximum(np.abs(v), 1e-300)) for k, v in ys.items()}
    ymin = min(float(np.min(v)) for v in ys.values())
    ymax = max(float(np.max(v)) for v in ys.values())
    if ymax == ymin:
        ymax = ymin + 1.0
    x0, x1 = float(np.min(x)), float(np.max(x))
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * (W - ml - mr)

    def sy(v):
        return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb)

    colors = ["#1f6fb2", "#c23b22", "#2e8b57", "#8b5cf6", "#b8860b", "#444444"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
        f'<line x1="{ml}" y1="{H - mb}" x2="{W - mr}" y2="{H - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{H - mb}" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4
        yv = ymin + i * (ymax - ymin) / 4
        parts.append(f'<text x="{sx(xv):.1f}" y="{H - mb + 16}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{xv:.3g}</text>')
        label = f"1e{yv:.2f}" if logy else f"{yv:.3g}"
        parts.append(f'<text x="{ml - 6}" y="{sy(yv):.1f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="10">{label}</text>')
    for i, name in enumerate(names):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, ys[name]))
        col = colors[i % len(colors)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{col}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{W - mr - 4}" y="{mt + 14 + 14 * i}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11" fill="{col}">{name}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
