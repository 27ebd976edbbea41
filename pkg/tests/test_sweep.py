import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mapflow.dynamics import IntegratorConfig, Label, RK4Fixed, Thresholds
from mapflow.errors import DomainError
from mapflow.scenarios import straight_boundary
from mapflow.stability import CharPoly, Verdict, hurwitz_sequence, roots
from mapflow.sweep import (
    Axis,
    ColdStart,
    FollowAttractor,
    ScaledCubicSystem,
    SweepPlan,
    SweepRecord,
    TruncatedLogistic,
    bifurcation_sweep,
    boundary_density,
    decrease_factor,
    label_grid,
    plane_scan,
)

FAST = IntegratorConfig(RK4Fixed(0.02), t_end=600.0)
FAST_TH = Thresholds(t_transient=200.0)


def equilibrium_poly(nu, lam):
    # linearisation of X''' + X'' + nu X' - lam X + X^2 about X = lam
    return CharPoly(3, (Fraction(1), Fraction(1), Fraction(nu), Fraction(lam)))


def test_plan_validation():
    with pytest.raises(DomainError):
        Axis("mu", 0, 1, 10)
    with pytest.raises(DomainError):
        Axis("nu", 1, 0, 10)
    with pytest.raises(DomainError):
        Axis("nu", 0, 1, 1)
    with pytest.raises(DomainError):
        TruncatedLogistic(5)
    plan = SweepPlan(ScaledCubicSystem(), Axis("nu", 0.3, 1, 3), Axis("lambda", 0.2, 1, 3), FollowAttractor())
    with pytest.raises(DomainError):
        plane_scan(plan)
    with pytest.raises(DomainError):
        bifurcation_sweep(plan)


def test_stable_corner_grid():
    plan = SweepPlan(ScaledCubicSystem(), Axis("nu", 0.9, 1.0, 2), Axis("lambda", 0.3, 0.4, 2), ColdStart(),
                     FAST, FAST_TH)
    grid = plane_scan(plan, threads=2)
    assert [[r.cls.label for r in row] for row in grid] == [[Label.FIXED_POINT] * 2] * 2
    assert grid[1][0].params == {"nu": 0.9, "lambda": 0.4}


def test_divergent_corner_has_escape_times():
    plan = SweepPlan(ScaledCubicSystem(), Axis("nu", 0.3, 0.5, 3), Axis("lambda", 1.2, 1.4, 3), ColdStart(),
                     FAST, FAST_TH)
    recs = [r for row in plane_scan(plan) for r in row]
    bad = [r for r in recs if r.cls.label is Label.UNSTABLE]
    assert bad
    assert all(math.isfinite(r.escape_time) and 0 < r.escape_time < 600 for r in bad)
    assert all(r.escape_time is None for r in recs if r.cls.label is not Label.UNSTABLE)


def test_logistic_sweep_below_hopf_is_fixed_point():
    plan = SweepPlan(TruncatedLogistic(3), Axis("p", 1.0, 3.9, 30), continuation=ColdStart())
    recs = bifurcation_sweep(plan)
    assert [r.params["p"] for r in recs] == pytest.approx(np.linspace(1, 3.9, 30).tolist())
    assert all(r.cls.label is Label.FIXED_POINT for r in recs)


def test_below_stability_boundary_only_fixed_points():
    nu = 2 / 3
    lams = np.linspace(0.05, 0.6, 12)
    for lam in lams:
        assert hurwitz_sequence(equilibrium_poly(nu, lam)).verdict is Verdict.STABLE
    plan = SweepPlan(ScaledCubicSystem(), Axis("lambda", 0.05, 0.6, 12), fixed=(("nu", nu),))
    assert all(r.cls.label is Label.FIXED_POINT for r in bifurcation_sweep(plan))


def test_stable_points_near_cold_start_are_fixed_points():
    plan = SweepPlan(ScaledCubicSystem(), Axis("nu", 0.3, 1.2, 6), Axis("lambda", 0.09, 0.11, 3), ColdStart(),
                     FAST, FAST_TH)
    grid = plane_scan(plan)
    checked = 0
    for row in grid:
        for r in row:
            nu, lam = r.params["nu"], r.params["lambda"]
            cp = equilibrium_poly(nu, lam)
            margin = float(np.max(roots(cp).real))
            if hurwitz_sequence(cp).verdict is Verdict.STABLE and margin < -1e-3 and abs(0.1 - lam) <= 1e-2:
                assert r.cls.label is Label.FIXED_POINT
                checked += 1
    assert checked >= 6


def test_follow_and_cold_agree_on_fixed_point_sweep():
    axis = Axis("lambda", 0.1, 0.6, 11)
    a = bifurcation_sweep(SweepPlan(ScaledCubicSystem(), axis, continuation=FollowAttractor()))
    b = bifurcation_sweep(SweepPlan(ScaledCubicSystem(), axis, continuation=ColdStart()), threads=3)
    assert [r.cls.label for r in a] == [r.cls.label for r in b] == [Label.FIXED_POINT] * 11


def test_period_doubling_order():
    plan = SweepPlan(ScaledCubicSystem(), Axis("lambda", 0.9, 1.25, 36), fixed=(("nu", 2 / 3),))
    labels = [str(r.cls) for r in bifurcation_sweep(plan)]
    first = {k: labels.index(k) for k in ("Periodic(1)", "Periodic(2)", "Periodic(4)")}
    assert first["Periodic(1)"] < first["Periodic(2)"] < first["Periodic(4)"]


def test_peaks_capped_and_finite():
    plan = SweepPlan(ScaledCubicSystem(), Axis("lambda", 1.1, 1.2, 2), fixed=(("nu", 2 / 3),))
    for r in bifurcation_sweep(plan):
        assert 0 < len(r.peaks) <= 64
        assert all(math.isfinite(v) for v in r.peaks)


def test_record_round_trip():
    plan = SweepPlan(ScaledCubicSystem(), Axis("lambda", 1.1, 1.4, 2), fixed=(("nu", 2 / 3),))
    for r in bifurcation_sweep(plan):
        assert SweepRecord.from_dict(r.to_dict()) == r


def test_plane_scan_thread_independent():
    plan = SweepPlan(ScaledCubicSystem(), Axis("nu", 0.5, 0.9, 4), Axis("lambda", 0.8, 1.4, 4), ColdStart(),
                     FAST, FAST_TH)
    a, b = plane_scan(plan, threads=1), plane_scan(plan, threads=3)
    assert [[x.to_dict() for x in row] for row in a] == [[x.to_dict() for x in row] for row in b]


def test_boundary_density_uniform():
    assert boundary_density(np.zeros((33, 33), int), 5) == [0.0] * 5


def test_boundary_density_errors():
    with pytest.raises(DomainError):
        boundary_density(np.zeros((16, 16), int), 4)
    with pytest.raises(DomainError):
        boundary_density(np.zeros((16, 16), int), 1)


def test_straight_boundary_halves():
    f = boundary_density(straight_boundary(200, 0.71, 0.065), 7)
    assert decrease_factor(f[1:]) == pytest.approx(2.0, abs=0.1)


@given(st.floats(0.2, 3.0), st.floats(-0.1, 0.1))
def test_straight_boundary_factor_near_two(slope, shift):
    # lines through (near) the centre of the unit square
    f = boundary_density(straight_boundary(129, slope, 0.5 - 0.5 * slope + shift), 7)[2:]
    assert 1.7 <= decrease_factor(f) <= 2.3


def test_random_labels_do_not_decay():
    labels = np.random.default_rng(5).integers(0, 4, size=(129, 129))
    f = boundary_density(labels, 7)
    assert min(f) > 0.9
    assert decrease_factor(f) < 1.05


def test_label_grid_distinguishes_periods():
    plan = SweepPlan(ScaledCubicSystem(), Axis("lambda", 0.9, 1.2, 2), continuation=ColdStart(),
                     fixed=(("nu", 2 / 3),))
    recs = bifurcation_sweep(plan)
    codes = label_grid([recs])
    assert codes.tolist() == [[101, 104]]
