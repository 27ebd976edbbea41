"""CSV, JSON and SVG writers for trajectories and sweeps.

Floats are written with 17 significant digits so that repeated runs give
byte-identical files and values parse back exactly.
"""
from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .dynamics import Trajectory
from .sweep import SweepRecord

__all__ = [
    "fmt",
    "trajectory_csv",
    "bifurcation_csv",
    "bifurcation_json",
    "plane_csv",
    "read_plane_csv",
    "bifurcation_svg",
    "dumps",
]


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def trajectory_csv(traj: Trajectory) -> str:
    n = traj.states.shape[1] if traj.states.ndim == 2 else 0
    lines = [",".join(["t"] + [f"xi{k + 1}" for k in range(n)])]
    for t, row in zip(traj.times, traj.states):
        lines.append(",".join([fmt(t)] + [fmt(v) for v in row]))
    footer = f"# status={traj.status.value}"
    if traj.at_time is not None:
        footer += f" at_time={fmt(traj.at_time)}"
    lines.append(footer)
    return "\n".join(lines) + "\n"


def bifurcation_csv(records: Sequence[SweepRecord], axis: str) -> str:
    """``param,peak`` with one row per retained peak."""
    lines = ["param,peak"]
    for r in records:
        p = fmt(r.params[axis])
        for v in r.peaks:
            lines.append(f"{p},{fmt(v)}")
    return "\n".join(lines) + "\n"


def bifurcation_json(records: Sequence[SweepRecord], axis: str) -> str:
    """Per-point class and exponent, the sidecar to :func:`bifurcation_csv`."""
    rows = []
    for r in records:
        rows.append({
            "param": r.params[axis],
            "class": str(r.cls),
            "code": r.cls.label.code,
            "period": r.cls.period,
            "lyapunov": r.lyapunov,
            "escape_time": r.escape_time,
        })
    return dumps({"axis": axis, "points": rows})


def plane_csv(grid: Sequence[Sequence[SweepRecord]]) -> str:
    """``nu,lambda,class,period,lyapunov,escape_time``, row-major."""
    lines = ["nu,lambda,class,period,lyapunov,escape_time"]
    for row in grid:
        for r in row:
            c = r.cls
            lines.append(",".join([
                fmt(r.params["nu"]),
                fmt(r.params["lambda"]),
                str(c.label.code),
                "" if c.period is None else str(c.period),
                fmt(r.lyapunov),
                fmt(r.escape_time),
            ]))
    return "\n".join(lines) + "\n"


def read_plane_csv(text: str) -> np.ndarray:
    """Structured array view of a plane CSV (empty fields become NaN / 0)."""
    rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
    out = np.zeros(len(rows), dtype=[("nu", float), ("lambda", float), ("class", int),
                                     ("period", int), ("lyapunov", float), ("escape_time", float)])
    for i, r in enumerate(rows):
        out[i] = (float(r[0]), float(r[1]), int(r[2]), int(r[3] or 0),
                  float(r[4]) if r[4] else np.nan, float(r[5]) if r[5] else np.nan)
    return out


def bifurcation_svg(records: Sequence[SweepRecord], axis: str, width: int = 800, height: int = 500) -> str:
    """Scatter of peaks against the swept parameter, one dot per peak."""
    xs = [r.params[axis] for r in records for _ in r.peaks]
    ys = [v for r in records for v in r.peaks]
    pad = 40
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n')
    if not xs:
        return head + "</svg>\n"
    x0, x1 = min(r.params[axis] for r in records), max(r.params[axis] for r in records)
    y0, y1 = min(ys), max(ys)
    sx = (width - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (height - 2 * pad) / ((y1 - y0) or 1.0)
    dots = []
    for x, y in zip(xs, ys):
        px = pad + (x - x0) * sx
        py = height - pad - (y - y0) * sy
        dots.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="0.6"/>')
    axes = (f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
            f'<text x="{width // 2}" y="{height - 8}" font-size="12">{axis}</text>\n'
            f'<text x="4" y="{pad - 8}" font-size="12">peaks of x</text>\n')
    return head + axes + '<g fill="black">\n' + "\n".join(dots) + "\n</g>\n</svg>\n"
