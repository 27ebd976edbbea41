"""Integration of the nonlinear truncations, Lyapunov exponents, and
attractor classification.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import DomainError, InconclusiveWindow, TrajectoryDiverged
from .fields import VectorField

__all__ = [
    "RK4Fixed",
    "RK45Adaptive",
    "IntegratorConfig",
    "Status",
    "Trajectory",
    "Label",
    "AttractorClass",
    "Thresholds",
    "OrbitSummary",
    "integrate",
    "orbit_summary",
    "largest_lyapunov",
    "classify",
    "classify_summary",
    "classify_with_summary",
    "peak_period",
]


@dataclass(frozen=True)
class RK4Fixed:
    h: float = 1e-2

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("RK4 step h must be positive")


@dataclass(frozen=True)
class RK45Adaptive:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")


@dataclass(frozen=True)
class IntegratorConfig:
    method: RK4Fixed | RK45Adaptive = field(default_factory=RK4Fixed)
    t_end: float = 2500.0
    divergence_bound: float = 1e8
    sample_stride: float = 0.05

    def __post_init__(self):
        if not self.t_end > 0:
            raise DomainError("t_end must be positive")
        if not self.divergence_bound > 0:
            raise DomainError("divergence_bound must be positive")
        if not self.sample_stride > 0:
            raise DomainError("sample_stride must be positive")

    def _kernel_args(self):
        if isinstance(self.method, RK4Fixed):
            return K.RK4, self.method.h, 1.0, 1.0
        return K.DOPRI5, 0.0, self.method.rel_tol, self.method.abs_tol


class Status(str, enum.Enum):
    COMPLETED = "Completed"
    DIVERGED = "Diverged"
    STEP_FAILURE = "StepFailure"


_STATUS = {K.COMPLETED: Status.COMPLETED, K.DIVERGED: Status.DIVERGED, K.STEP_FAILURE: Status.STEP_FAILURE}


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution. Column ``k`` of ``states`` is ``x^(k)``."""

    times: np.ndarray
    states: np.ndarray
    status: Status
    at_time: float | None = None

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _prepare(fld: VectorField, x0) -> np.ndarray:
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if x0.shape != (fld.dim,):
        raise DomainError(f"initial state must have length {fld.dim}")
    if not np.all(np.isfinite(x0)):
        raise DomainError("initial state must be finite")
    return x0


def _jac_or_dummy(fld: VectorField):
    from .fields import linear_jac

    return fld.jac if fld.jac is not None else linear_jac


def integrate(fld: VectorField, x0, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate ``fld`` from ``x0`` over ``[0, cfg.t_end]``.

    Samples are taken at every multiple of ``cfg.sample_stride`` from the
    dense interpolant. Integration stops with status Diverged as soon as any
    state component exceeds ``cfg.divergence_bound`` in magnitude (or
    becomes non-finite); adaptive step underflow gives StepFailure.
    """
    cfg = cfg or IntegratorConfig()
    x0 = _prepare(fld, x0)
    method, h, rtol, atol = cfg._kernel_args()
    cap = int(math.floor(cfg.t_end / cfg.sample_stride + 1e-9)) + 1
    samples = np.empty((cap, fld.dim))
    times = np.empty(cap)
    empty = np.empty(0)
    status, t_stop, ns, _, _, _, _ = K.drive(
        fld.rhs, _jac_or_dummy(fld), fld.params, x0, False, method, h, rtol, atol,
        float(cfg.t_end), 0.0, float(cfg.sample_stride), float(cfg.divergence_bound), 1.0,
        samples, times, empty, empty,
    )
    st = _STATUS[status]
    return Trajectory(times[:ns].copy(), samples[:ns].copy(), st, None if st is Status.COMPLETED else float(t_stop))


@dataclass(frozen=True)
class OrbitSummary:
    """Post-transient statistics of one run (no stored trajectory)."""

    status: Status
    t_stop: float
    peaks: np.ndarray
    troughs: np.ndarray
    lyapunov: float | None
    final_state: np.ndarray
    speed: float


def orbit_summary(
    fld: VectorField,
    x0,
    cfg: IntegratorConfig,
    t_transient: float,
    tangent: bool = True,
    renorm: float = 1.0,
) -> OrbitSummary:
    """Run to ``cfg.t_end``; collect extrema of ``x`` and the log stretching
    of a tangent vector after ``t_transient``."""
    x0 = _prepare(fld, x0)
    if tangent and fld.jac is None:
        raise DomainError("Lyapunov estimation needs an analytic Jacobian")
    if not 0 <= t_transient < cfg.t_end:
        raise DomainError("need 0 <= t_transient < t_end")
    method, h, rtol, atol = cfg._kernel_args()
    cap = int((cfg.t_end - t_transient) / cfg.sample_stride) // 2 + 2
    peaks = np.empty(cap)
    troughs = np.empty(cap)
    status, t_stop, _, npk, ntr, stretch, zf = K.drive(
        fld.rhs, _jac_or_dummy(fld), fld.params, x0, tangent, method, h, rtol, atol,
        float(cfg.t_end), float(t_transient), float(cfg.sample_stride), float(cfg.divergence_bound),
        float(renorm), np.empty((0, fld.dim)), np.empty(0), peaks, troughs,
    )
    st = _STATUS[status]
    lyap = None
    if tangent and st is Status.COMPLETED:
        lyap = stretch / (cfg.t_end - t_transient)
    speed = float(np.linalg.norm(fld(zf))) if st is Status.COMPLETED else math.inf
    return OrbitSummary(st, float(t_stop), peaks[:npk].copy(), troughs[:ntr].copy(), lyap, zf, speed)


def largest_lyapunov(
    fld: VectorField,
    x0,
    cfg: IntegratorConfig | None = None,
    t_transient: float = 500.0,
    t_measure: float = 2000.0,
    renorm: float = 1.0,
) -> float:
    """Largest Lyapunov exponent (nats per unit time) by Benettin's method.

    A tangent vector is evolved with the analytic Jacobian alongside the
    state, renormalised every ``renorm`` time units, and its mean log
    growth over ``t_measure`` (after ``t_transient``) is returned.

    Raises
    ------
    TrajectoryDiverged
        If the orbit escapes before the measurement is complete.
    """
    cfg = replace(cfg or IntegratorConfig(), t_end=t_transient + t_measure)
    s = orbit_summary(fld, x0, cfg, t_transient, tangent=True, renorm=renorm)
    if s.status is not Status.COMPLETED:
        raise TrajectoryDiverged(f"orbit {s.status.value.lower()} at t = {s.t_stop:.6g}", s.t_stop)
    return float(s.lyapunov)


class Label(str, enum.Enum):
    FIXED_POINT = "FixedPoint"
    PERIODIC = "Periodic"
    CHAOTIC = "Chaotic"
    UNSTABLE = "Unstable"

    @property
    def code(self) -> int:
        return _CODES[self]


_CODES = {Label.FIXED_POINT: 0, Label.PERIODIC: 1, Label.CHAOTIC: 2, Label.UNSTABLE: 3}


@dataclass(frozen=True)
class AttractorClass:
    label: Label
    period: int | None = None
    lyapunov: float | None = None
    peak_values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.label is Label.PERIODIC and not (self.period and self.period >= 1):
            raise DomainError("Periodic class needs period >= 1")

    def __str__(self):
        if self.label is Label.PERIODIC:
            return f"Periodic({self.period})"
        return self.label.value

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "period": self.period,
            "lyapunov": self.lyapunov,
            "peak_values": list(self.peak_values),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttractorClass":
        return cls(Label(d["label"]), d.get("period"), d.get("lyapunov"), tuple(d.get("peak_values", ())))


@dataclass(frozen=True)
class Thresholds:
    t_transient: float = 500.0
    renorm: float = 1.0
    peak_tol: float = 1e-3
    fp_tol: float = 1e-6
    chaos_tol: float = 5e-3
    max_period: int = 16
    min_peaks: int = 8


def _scale(peaks: np.ndarray) -> float:
    return max(float(np.max(np.abs(peaks))), 1e-12)


def peak_period(peaks: Sequence[float], tol: float, max_period: int) -> int | None:
    """Smallest lag ``k <= max_period`` with ``|p[i+k] - p[i]| <= tol`` for all
    ``i``, looking only at the tail that leaves at least 3 repeats."""
    p = np.asarray(peaks, dtype=float)
    for k in range(1, max_period + 1):
        if p.size < 3 * k + 1:
            return None
        if np.all(np.abs(p[k:] - p[:-k]) <= tol):
            return k
    return None


def _best_period(peaks: np.ndarray, max_period: int) -> int:
    errs = []
    for k in range(1, max_period + 1):
        if peaks.size <= k:
            break
        errs.append(float(np.max(np.abs(peaks[k:] - peaks[:-k]))))
    return int(np.argmin(errs)) + 1 if errs else 1


def classify_summary(s: OrbitSummary, th: Thresholds) -> AttractorClass:
    """Turn run statistics into an :class:`AttractorClass`.

    Order of tests: divergence gives Unstable; a resting final state, a
    clearly negative exponent, or a vanishing oscillation amplitude gives
    FixedPoint; a peak sequence that repeats with lag ``k <= max_period``
    gives Periodic(k); otherwise the exponent decides between Chaotic and
    Periodic(best lag).
    """
    if s.status is not Status.COMPLETED:
        return AttractorClass(Label.UNSTABLE)
    lyap = s.lyapunov
    peaks = s.peaks
    tail = tuple(float(v) for v in peaks[-64:])
    if s.speed < th.fp_tol:
        return AttractorClass(Label.FIXED_POINT, lyapunov=lyap, peak_values=tail)
    if lyap is not None and lyap < -th.chaos_tol:
        return AttractorClass(Label.FIXED_POINT, lyapunov=lyap, peak_values=tail)
    if peaks.size >= 1 and s.troughs.size >= 1:
        n = min(peaks.size, s.troughs.size, 16)
        amp = float(np.mean(peaks[-n:]) - np.mean(s.troughs[-n:]))
        if abs(amp) < th.peak_tol * _scale(peaks) and peak_period(peaks, th.peak_tol * _scale(peaks), 1) == 1:
            return AttractorClass(Label.FIXED_POINT, lyapunov=lyap, peak_values=tail)
    if peaks.size < th.min_peaks:
        raise InconclusiveWindow(
            f"only {peaks.size} maxima in the measurement window; lengthen t_end", residuals=peaks
        )
    tol = th.peak_tol * _scale(peaks)
    k = peak_period(peaks, tol, th.max_period)
    if k is not None:
        return AttractorClass(Label.PERIODIC, k, lyap, tail)
    if lyap is not None and lyap > th.chaos_tol:
        return AttractorClass(Label.CHAOTIC, None, lyap, tail)
    return AttractorClass(Label.PERIODIC, _best_period(peaks, th.max_period), lyap, tail)


def classify(
    fld: VectorField,
    x0,
    cfg: IntegratorConfig | None = None,
    thresholds: Thresholds | None = None,
) -> AttractorClass:
    """Classify the attractor reached from ``x0``.

    The run covers ``[0, cfg.t_end]``; everything before
    ``thresholds.t_transient`` is discarded.
    """
    cfg = cfg or IntegratorConfig()
    th = thresholds or Thresholds()
    return classify_with_summary(fld, x0, cfg, th)[0]


def classify_with_summary(fld: VectorField, x0, cfg: IntegratorConfig, th: Thresholds):
    """Two-pass classification returning ``(class, summary)``.

    The first pass skips the tangent vector; only when its peaks and speed
    leave the class open is the run repeated with the Lyapunov estimate.
    """
    s = orbit_summary(fld, x0, cfg, th.t_transient, tangent=False)
    try:
        c = classify_summary(s, th)
    except InconclusiveWindow:
        c = None
    if c is not None and c.label is not Label.CHAOTIC and not (c.label is Label.PERIODIC and c.lyapunov is None and peak_period(s.peaks, th.peak_tol * _scale(s.peaks), th.max_period) is None):
        return c, s
    if fld.jac is None:
        if c is None:
            raise InconclusiveWindow("too few maxima and no Jacobian for a Lyapunov estimate")
        return c, s
    s = orbit_summary(fld, x0, cfg, th.t_transient, tangent=True, renorm=th.renorm)
    return classify_summary(s, th), s
