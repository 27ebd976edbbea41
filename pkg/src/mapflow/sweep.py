"""Bifurcation sweeps and two-parameter plane scans.

Every grid point is integrated and classified independently (ColdStart) or
seeded from its left neighbour's final state (FollowAttractor). Results are
written into a table indexed by grid position, so the output does not
depend on how the work was scheduled across threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dynamics import (
    AttractorClass,
    IntegratorConfig,
    Label,
    Status,
    Thresholds,
    classify_with_summary,
)
from .embedding import ScaledCubic, truncate
from .errors import DomainError, InconclusiveWindow
from .fields import VectorField
from .maps import Logistic

__all__ = [
    "ScaledCubicSystem",
    "TruncatedLogistic",
    "Axis",
    "ColdStart",
    "FollowAttractor",
    "SweepPlan",
    "SweepRecord",
    "bifurcation_sweep",
    "plane_scan",
    "boundary_density",
    "decrease_factor",
    "label_grid",
]

AXIS_NAMES = ("p", "nu", "lambda")
MAX_PEAKS = 64
MAX_RETRIES = 2


@dataclass(frozen=True)
class ScaledCubicSystem:
    """``X''' + X'' + nu X' - lambda X + X^2 = 0``; ``p`` maps to ``lambda = 2(p-1)/9``."""

    def field(self, params: dict) -> VectorField:
        nu = params.get("nu", 2.0 / 3.0)
        if "lambda" in params:
            lam = params["lambda"]
        elif "p" in params:
            lam = 2.0 * (params["p"] - 1.0) / 9.0
        else:
            raise DomainError("scaled cubic needs lambda or p")
        return ScaledCubic(nu, lam).field()

    def default_x0(self) -> tuple[float, ...]:
        return (0.1, 0.0, 0.0)

    def __str__(self):
        return "ScaledCubic"


@dataclass(frozen=True)
class TruncatedLogistic:
    order: int = 3

    def __post_init__(self):
        if self.order not in (3, 4):
            raise DomainError("TruncatedLogistic sweeps support N = 3 or 4")

    def field(self, params: dict) -> VectorField:
        if "p" not in params:
            raise DomainError("logistic truncation needs p")
        return truncate(Logistic(params["p"]), self.order).field()

    def default_x0(self) -> tuple[float, ...]:
        return (0.3,) + (0.0,) * (self.order - 1)

    def __str__(self):
        return f"TruncatedLogistic({self.order})"


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise DomainError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.steps < 2:
            raise DomainError("an axis needs at least 2 steps")
        if not self.lo < self.hi:
            raise DomainError("axis needs lo < hi")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class ColdStart:
    x0: tuple[float, ...] | None = None


@dataclass(frozen=True)
class FollowAttractor:
    pass


@dataclass(frozen=True)
class SweepPlan:
    system: ScaledCubicSystem | TruncatedLogistic
    axis1: Axis
    axis2: Axis | None = None
    continuation: ColdStart | FollowAttractor = field(default_factory=FollowAttractor)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    fixed: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise DomainError("the two axes must differ")
        for name, _ in self.fixed:
            if name not in AXIS_NAMES:
                raise DomainError(f"unknown fixed parameter {name!r}")

    def cold_x0(self) -> tuple[float, ...]:
        if isinstance(self.continuation, ColdStart) and self.continuation.x0 is not None:
            return tuple(self.continuation.x0)
        return self.system.default_x0()


@dataclass(frozen=True)
class SweepRecord:
    params: dict
    cls: AttractorClass
    peaks: tuple[float, ...]
    lyapunov: float | None
    escape_time: float | None

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "class": self.cls.to_dict(),
            "peaks": list(self.peaks),
            "lyapunov": self.lyapunov,
            "escape_time": self.escape_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepRecord":
        return cls(
            dict(d["params"]),
            AttractorClass.from_dict(d["class"]),
            tuple(d["peaks"]),
            d["lyapunov"],
            d["escape_time"],
        )


def _point(plan: SweepPlan, params: dict, x0) -> tuple[SweepRecord, np.ndarray | None]:
    fld = plan.system.field(params)
    cfg = plan.integrator
    th = plan.thresholds
    for attempt in range(MAX_RETRIES + 1):
        try:
            c, s = classify_with_summary(fld, x0, cfg, th)
            break
        except InconclusiveWindow:
            if attempt == MAX_RETRIES:
                # No sustained oscillation even in the longest window: a slow
                # monotone approach to rest.
                c = AttractorClass(Label.FIXED_POINT)
                s = None
                break
            span = cfg.t_end - th.t_transient
            cfg = replace(cfg, t_end=cfg.t_end + 2 * span)
    if s is None:
        return SweepRecord(params, c, (), None, None), None
    peaks = tuple(float(v) for v in s.peaks[-MAX_PEAKS:])
    escape = s.t_stop if s.status is not Status.COMPLETED else None
    final = s.final_state if s.status is Status.COMPLETED else None
    return SweepRecord(params, c, peaks, c.lyapunov, escape), final


def _grid_params(plan: SweepPlan) -> list[dict]:
    base = dict(plan.fixed)
    if isinstance(plan.system, ScaledCubicSystem):
        base.setdefault("nu", 2.0 / 3.0)
    out = []
    a1 = plan.axis1.values()
    if plan.axis2 is None:
        for v in a1:
            out.append({**base, plan.axis1.name: float(v)})
        return out
    for u in plan.axis2.values():
        for v in a1:
            out.append({**base, plan.axis1.name: float(v), plan.axis2.name: float(u)})
    return out


def _run_parallel(plan: SweepPlan, params: list[dict], bands: list[range], threads: int | None) -> list[SweepRecord]:
    x0 = plan.cold_x0()
    table: list[SweepRecord | None] = [None] * len(params)

    def work(band: range):
        for i in band:
            table[i] = _point(plan, params[i], x0)[0]

    workers = max(1, threads or os.cpu_count() or 1)
    if workers == 1:
        for b in bands:
            work(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(work, bands))
    return table  # type: ignore[return-value]


def bifurcation_sweep(plan: SweepPlan, threads: int | None = None) -> list[SweepRecord]:
    """One record per point of ``axis1``, ascending.

    FollowAttractor seeds each point with the final state of the previous
    one and restarts from the cold initial condition after an escape.
    """
    if plan.axis2 is not None:
        raise DomainError("bifurcation_sweep takes a single axis; use plane_scan")
    params = _grid_params(plan)
    if isinstance(plan.continuation, ColdStart):
        n = len(params)
        chunk = 32
        bands = [range(i, min(i + chunk, n)) for i in range(0, n, chunk)]
        return _run_parallel(plan, params, bands, threads)
    cold = plan.cold_x0()
    x0 = cold
    out = []
    for pr in params:
        rec, final = _point(plan, pr, x0)
        out.append(rec)
        x0 = tuple(final) if final is not None else cold
    return out


def plane_scan(plan: SweepPlan, threads: int | None = None) -> list[list[SweepRecord]]:
    """Row-major grid ``grid[i][j]`` with ``axis2`` value ``i`` and ``axis1`` value ``j``."""
    if plan.axis2 is None:
        raise DomainError("plane_scan needs two axes")
    if not isinstance(plan.continuation, ColdStart):
        raise DomainError("plane scans use ColdStart so every point is independent")
    params = _grid_params(plan)
    n1 = plan.axis1.steps
    bands = [range(r * n1, (r + 1) * n1) for r in range(plan.axis2.steps)]
    flat = _run_parallel(plan, params, bands, threads)
    return [flat[r * n1:(r + 1) * n1] for r in range(plan.axis2.steps)]


def label_grid(grid) -> np.ndarray:
    """Integer keys of the full class labels, ``100 * code + period``.

    Periodic(1) and Periodic(2) count as different labels. Integer arrays
    pass through unchanged.
    """
    if isinstance(grid, np.ndarray):
        return grid.astype(int)
    return np.array(
        [[100 * rec.cls.label.code + (rec.cls.period or 0) for rec in row] for row in grid], dtype=int
    )


def boundary_density(grid, refinement_levels: int) -> list[float]:
    """Fraction of mixed cells at resolutions ``2^l x 2^l``, ``l = 1..L``.

    The grid is subsampled at ``2^l + 1`` evenly spaced indices per axis; a
    cell is mixed when its four corners do not all carry the same class
    label (period included). For a smooth boundary the fraction halves with each level; a
    fraction that decays more slowly signals boundaries that fill area.
    """
    codes = label_grid(grid)
    if codes.ndim != 2:
        raise DomainError("grid must be two-dimensional")
    if refinement_levels < 2:
        raise DomainError("refinement_levels must be >= 2")
    n = min(codes.shape)
    if 2 ** refinement_levels + 1 > n:
        raise DomainError(
            f"a {codes.shape[0]}x{codes.shape[1]} grid supports at most "
            f"{int(math.log2(n - 1))} levels, asked for {refinement_levels}"
        )
    out = []
    for lvl in range(1, refinement_levels + 1):
        m = 2 ** lvl + 1
        ri = np.round(np.linspace(0, codes.shape[0] - 1, m)).astype(int)
        ci = np.round(np.linspace(0, codes.shape[1] - 1, m)).astype(int)
        sub = codes[np.ix_(ri, ci)]
        a, b, c, d = sub[:-1, :-1], sub[:-1, 1:], sub[1:, :-1], sub[1:, 1:]
        mixed = (a != b) | (a != c) | (a != d)
        out.append(float(mixed.mean()))
    return out


def decrease_factor(fractions: Sequence[float]) -> float:
    """Geometric-mean ratio between successive levels (``inf`` if the finest is 0)."""
    f = list(fractions)
    if len(f) < 2:
        raise DomainError("need at least two levels")
    if f[0] == 0:
        return math.nan
    if f[-1] == 0:
        return math.inf
    return (f[0] / f[-1]) ** (1.0 / (len(f) - 1))
