"""Named end-to-end checks shared by ``mapflow reproduce`` and the test suite.

Each scenario returns a :class:`ScenarioResult` whose ``lines`` explain the
outcome; ``passed`` is the verdict at the stated tolerance.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .dynamics import (
    IntegratorConfig,
    Label,
    RK4Fixed,
    RK45Adaptive,
    Status,
    Thresholds,
    integrate,
)
from .embedding import linear_system, scaled_from_unscaled, to_scaled, truncate
from .errors import DegenerateSpectrum
from .io import bifurcation_csv, bifurcation_json, plane_csv
from .linear_solution import propagate_closed, propagate_series
from .maps import Logistic
from .stability import (
    Verdict,
    char_poly,
    closed_form_u,
    hurwitz_sequence,
    roots,
    stable_alpha_window,
)
from .sweep import (
    Axis,
    ColdStart,
    FollowAttractor,
    ScaledCubicSystem,
    SweepPlan,
    bifurcation_sweep,
    boundary_density,
    decrease_factor,
    label_grid,
    plane_scan,
)

__all__ = ["ScenarioResult", "SCENARIOS", "run_scenario", "ALPHA_GRID", "bifurcation_plan", "plane_plan"]

ALPHA_GRID = (
    Fraction(-10), Fraction(-1), Fraction(-1, 3), Fraction(0),
    Fraction(1, 2), Fraction(1), Fraction(17, 7), Fraction(10),
)


@dataclass
class ScenarioResult:
    scenario: str
    criterion: int
    passed: bool
    lines: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def summary(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.criterion} ({self.scenario}) {self.seconds:.1f}s"


def bifurcation_plan() -> SweepPlan:
    """nu = 2/3 sweep over lambda in [0.2, 1.5] with 1301 points."""
    return SweepPlan(
        ScaledCubicSystem(),
        Axis("lambda", 0.2, 1.5, 1301),
        continuation=FollowAttractor(),
        fixed=(("nu", 2.0 / 3.0),),
    )


def plane_plan(steps: int = 200) -> SweepPlan:
    """(nu, lambda) in [0.3, 1.2] x [0.2, 1.4] at desk-scale integration settings."""
    return SweepPlan(
        ScaledCubicSystem(),
        Axis("nu", 0.3, 1.2, steps),
        Axis("lambda", 0.2, 1.4, steps),
        continuation=ColdStart(),
        integrator=IntegratorConfig(RK4Fixed(0.02), t_end=600.0),
        thresholds=Thresholds(t_transient=200.0),
    )


def _hurwitz_closed_form(**_) -> tuple[bool, list[str]]:
    t0 = time.perf_counter()
    bad = []
    n = 0
    for order in range(6, 13):
        for a in ALPHA_GRID:
            cf = closed_form_u(order, a)
            u = hurwitz_sequence(char_poly(order, a)).u_sequence
            n += 1
            if tuple(u[: len(cf)]) != tuple(cf):
                bad.append((order, a))
    dt = time.perf_counter() - t0
    lines = [f"{n} cases, {len(bad)} mismatches, {dt:.3f}s (limit 1s)"]
    lines += [f"mismatch N={o} alpha={a}" for o, a in bad]
    return not bad and n == 56 and dt < 1.0, lines


def _n5_quadratic(**_) -> tuple[bool, list[str]]:
    ok = True
    lines = []
    for a in ALPHA_GRID + (Fraction(5, 3),):
        rep = hurwitz_sequence(char_poly(5, a))
        u4 = rep.u_sequence[4]
        expect = -((a - Fraction(5, 3)) ** 2 + Fraction(20, 9)) / 120**2
        good = u4 == expect and u4 < 0 and rep.verdict is not Verdict.STABLE
        ok &= good
        lines.append(f"alpha={a}: U_4={u4} verdict={rep.verdict.value} {'ok' if good else 'MISMATCH'}")
    return ok, lines


def _n5_instability(**_) -> tuple[bool, list[str]]:
    lines = []
    ok_a = True
    for order in range(5, 13):
        for a in ALPHA_GRID:
            rep = hurwitz_sequence(char_poly(order, a))
            if rep.sign_changes < 1 or rep.verdict is Verdict.STABLE:
                ok_a = False
                lines.append(f"(a) N={order} alpha={a}: sign_changes={rep.sign_changes}")
    lines.append(f"(a) sign_changes >= 1 for N in 5..12 on the alpha grid: {ok_a}")
    t0 = time.perf_counter()
    cfg = IntegratorConfig(t_end=200.0, sample_stride=1.0)
    ok_b = True
    runs = 0
    for order in (5, 6):
        for p in (2.5, 3.5, 3.9):
            fld = truncate(Logistic(p), order).field()
            for x in (0.3, 0.5, 0.8):
                tr = integrate(fld, [x] + [0.0] * (order - 1), cfg)
                runs += 1
                div = tr.status is Status.DIVERGED and tr.at_time < 200.0
                ok_b &= div
                lines.append(f"(b) N={order} p={p} x0={x}: {tr.status.value} at t={tr.at_time}")
    dt = time.perf_counter() - t0
    lines.append(f"(b) {runs} runs in {dt:.2f}s (limit 30s)")
    return ok_a and ok_b and runs == 18 and dt < 30.0, lines


def _root_count(**_) -> tuple[bool, list[str]]:
    ok = True
    lines = []
    checked = skipped = 0
    for order in range(1, 9):
        for a in ALPHA_GRID:
            mu = roots(char_poly(order, a))
            if np.any(np.abs(mu.real) < 1e-7):
                skipped += 1
                continue
            rep = hurwitz_sequence(char_poly(order, a))
            count = int(np.sum(mu.real > 0))
            checked += 1
            if rep.sign_changes != count:
                ok = False
                lines.append(f"N={order} alpha={a}: sign_changes={rep.sign_changes} roots={count}")
    lines.append(f"{checked} cases compared, {skipped} with near-imaginary roots skipped")
    return ok, lines


def _stable_window(**_) -> tuple[bool, list[str]]:
    w3 = stable_alpha_window(3)
    w4 = stable_alpha_window(4)
    mu = np.sort_complex(roots(char_poly(3, 3)))
    expect = np.sort_complex(np.array([-3.0, 1j * math.sqrt(6), -1j * math.sqrt(6)]))
    err = float(np.max(np.abs(mu - expect)))
    ok3 = w3 is not None and abs(w3[0]) < 1e-6 and abs(w3[1] - 3) < 1e-6
    ok4 = w4 is not None and abs(w4[0]) < 1e-6 and abs(w4[1] - 1.5) < 1e-6
    lines = [f"N=3 window {w3}", f"N=4 window {w4}", f"roots at alpha=3: {mu}, max error {err:.2e}"]
    return ok3 and ok4 and err < 1e-8, lines


def _linear_oracles(**_) -> tuple[bool, list[str]]:
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    cases = [(3, 0.0, 0.4), (2, 0.5, 0.0)]
    while len(cases) < 20:
        cases.append((int(rng.integers(1, 7)), float(rng.uniform(-1.0, 4.0)), float(rng.uniform(-1.0, 1.0))))
    cfg_int = RK45Adaptive(1e-11, 1e-13)
    ok = True
    lines = []
    for order, alpha, beta in cases:
        ls = linear_system(order, alpha, beta)
        xi0 = rng.normal(size=order)
        t = float(rng.uniform(0.1, 5.0))
        series = propagate_series(ls, xi0, t)
        scale = max(1.0, float(np.max(np.abs(series))))
        try:
            closed = propagate_closed(ls, xi0, t)
            d_cs = float(np.max(np.abs(closed - series))) / scale
        except DegenerateSpectrum:
            d_cs = None
        tr = integrate(ls.field(), xi0, IntegratorConfig(cfg_int, t_end=t, sample_stride=t))
        d_num = float(np.max(np.abs(tr.final_state - series))) / scale
        good = (d_cs is None or d_cs < 1e-8) and d_num < 1e-7 and tr.status is Status.COMPLETED
        if order == 2 and alpha == 0.5:
            good &= d_cs is None
        ok &= good
        cs = "degenerate" if d_cs is None else f"{d_cs:.1e}"
        lines.append(f"N={order} alpha={alpha:.4g} t={t:.3g}: closed-series {cs}, numeric-series {d_num:.1e}")
    dt = time.perf_counter() - t0
    lines.append(f"20 cases in {dt:.2f}s (limit 5s)")
    return ok and dt < 5.0, lines


def _scaled_equivalence(**_) -> tuple[bool, list[str]]:
    ok = True
    lines = []
    tight = RK45Adaptive(1e-11, 1e-13)
    for p in (3.0, 4.2):
        x0 = np.array([0.3, 0.1, -0.05])
        tx = integrate(truncate(Logistic(p), 3).field(), x0, IntegratorConfig(tight, t_end=10.0, sample_stride=1 / 60))
        tX = integrate(to_scaled(p).field(), scaled_from_unscaled(x0, p),
                       IntegratorConfig(tight, t_end=30.0, sample_stride=0.05))
        n = min(len(tx.times), len(tX.times))
        err = float(np.max(np.abs(scaled_from_unscaled(tx.states[:n], p) - tX.states[:n])))
        # The reading tau = t/3 rescales derivatives by 3^k instead of 3^-k.
        wrong = (2 * p / 9) * tx.states[:n] * 3.0 ** np.arange(3)
        err_wrong = float(np.max(np.abs(wrong - tX.states[:n])))
        good = n == 601 and err < 1e-6
        ok &= good
        lines.append(f"p={p}: tau=3t max error {err:.2e} over tau in [0, 30]; tau=t/3 reading gives {err_wrong:.2e}")
    return ok, lines




def _sweep_records(threads=None):
    return bifurcation_sweep(bifurcation_plan(), threads=threads)


def _bifurcation_sequence(threads=None, **_) -> tuple[bool, list[str]]:
    t0 = time.perf_counter()
    recs = _sweep_records(threads)
    dt = time.perf_counter() - t0
    labels = [str(r.cls) for r in recs]
    lines = [f"{len(recs)} points in {dt:.1f}s"]
    prev = None
    for r, s in zip(recs, labels):
        if s != prev:
            lines.append(f"lambda={r.params['lambda']:.4f}: {s}")
            prev = s

    def first(pred, start):
        for i in range(start, len(labels)):
            if pred(recs[i]):
                return i
        return None

    i_fp = first(lambda r: r.cls.label is Label.FIXED_POINT, 0)
    i_p1 = first(lambda r: str(r.cls) == "Periodic(1)", (i_fp or 0))
    i_p2 = first(lambda r: str(r.cls) == "Periodic(2)", (i_p1 or 0))
    i_p4 = first(lambda r: str(r.cls) == "Periodic(4)" or r.cls.label is Label.CHAOTIC, (i_p2 or 0))
    i_un = first(lambda r: r.cls.label is Label.UNSTABLE, 0)
    order_ok = None not in (i_fp, i_p1, i_p2, i_p4) and i_fp < i_p1 < i_p2 < i_p4
    unstable_ok = i_un is None or (i_p4 is not None and i_un > i_p4)
    lines.append(f"first indices FP={i_fp} P1={i_p1} P2={i_p2} P4/Chaotic={i_p4} Unstable={i_un}")
    return order_ok and unstable_ok and len(recs) >= 1000 and dt < 600, lines


def _windows(codes: np.ndarray, size: int = 50, stride: int = 25, levels: int = 5):
    out = []
    for i in range(0, codes.shape[0] - size + 1, stride):
        for j in range(0, codes.shape[1] - size + 1, stride):
            f = boundary_density(codes[i:i + size, j:j + size], levels)[1:]
            if f[0] > 0:
                out.append((decrease_factor(f), i, j, f))
    return sorted(out, key=lambda w: w[0])


def straight_boundary(n: int, slope: float, offset: float) -> np.ndarray:
    y, x = np.mgrid[0:n, 0:n] / (n - 1)
    return (y > slope * x + offset).astype(int)


def _riddling(threads=None, **_) -> tuple[bool, list[str]]:
    t0 = time.perf_counter()
    grid = plane_scan(plane_plan(), threads=threads)
    dt = time.perf_counter() - t0
    codes = label_grid(grid)
    wins = _windows(codes)
    lines = [f"200x200 scan in {dt:.1f}s; {len(wins)} 50x50 windows with boundary at level 2"]
    for fac, i, j, f in wins[:3]:
        lines.append(f"window rows {i}:{i + 50} cols {j}:{j + 50}: factor {fac:.3f}, fractions {np.round(f, 4).tolist()}")
    controls = []
    for slope, off in ((0.37, 0.1), (0.71, 0.065), (2.3, -0.2)):
        f = boundary_density(straight_boundary(50, slope, off), 5)[1:]
        controls.append(decrease_factor(f))
        lines.append(f"straight control slope {slope}: factor {controls[-1]:.3f}")
    riddled = bool(wins) and wins[0][0] < 1.6
    return riddled and min(controls) >= 1.9, lines


def _determinism(**_) -> tuple[bool, list[str]]:
    lines = []
    plan = bifurcation_plan()
    a = bifurcation_sweep(plan, threads=1)
    b = bifurcation_sweep(plan, threads=4)
    same_b = (bifurcation_csv(a, "lambda") == bifurcation_csv(b, "lambda")
              and bifurcation_json(a, "lambda") == bifurcation_json(b, "lambda"))
    lines.append(f"bifurcation CSV+JSON identical (threads 1 vs 4): {same_b}")
    pp = plane_plan()
    ga = plane_csv(plane_scan(pp, threads=1))
    gb = plane_csv(plane_scan(pp, threads=4))
    same_p = ga == gb
    lines.append(f"plane CSV identical (threads 1 vs 4): {same_p}, {len(ga)} bytes")
    return same_b and same_p, lines


SCENARIOS: dict[str, tuple[int, Callable]] = {
    "hurwitz-closed-form": (1, _hurwitz_closed_form),
    "n5-quadratic": (2, _n5_quadratic),
    "n5-instability": (3, _n5_instability),
    "root-count": (4, _root_count),
    "stable-window": (5, _stable_window),
    "linear-oracles": (6, _linear_oracles),
    "scaled-equivalence": (7, _scaled_equivalence),
    "bifurcation-sequence": (8, _bifurcation_sequence),
    "riddling": (9, _riddling),
    "determinism": (10, _determinism),
}


def run_scenario(name: str, threads: int | None = None) -> ScenarioResult:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    criterion, fn = SCENARIOS[name]
    t0 = time.perf_counter()
    passed, lines = fn(threads=threads)
    return ScenarioResult(name, criterion, bool(passed), lines, time.perf_counter() - t0)
