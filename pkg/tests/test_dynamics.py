import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from mapflow.dynamics import (
    AttractorClass,
    IntegratorConfig,
    Label,
    OrbitSummary,
    RK4Fixed,
    RK45Adaptive,
    Status,
    Thresholds,
    classify,
    classify_summary,
    integrate,
    largest_lyapunov,
    peak_period,
)
from mapflow.embedding import ScaledCubic, linear_system, linearize, truncate
from mapflow.errors import DomainError, InconclusiveWindow, TrajectoryDiverged
from mapflow.fields import VectorField
from mapflow.linear_solution import propagate_series
from mapflow.maps import Logistic
from mapflow.stability import char_poly, roots, to_rational

CHAOTIC = (0.8, 1.62)


def logistic_field(p, order=3):
    return truncate(Logistic(p), order).field()


def test_config_validation():
    with pytest.raises(DomainError):
        RK4Fixed(0.0)
    with pytest.raises(DomainError):
        RK45Adaptive(0.0, 1e-9)
    with pytest.raises(DomainError):
        IntegratorConfig(divergence_bound=-1)
    with pytest.raises(DomainError):
        integrate(logistic_field(4), [0.1, 0.0], IntegratorConfig(t_end=1.0))
    with pytest.raises(DomainError):
        integrate(logistic_field(4), [np.nan, 0.0, 0.0], IntegratorConfig(t_end=1.0))


@pytest.mark.parametrize("method", [RK4Fixed(), RK45Adaptive()])
def test_equilibrium_stays_put(method):
    c = ScaledCubic(2 / 3, 0.9)
    tr = integrate(c.field(), [0.9, 0, 0], IntegratorConfig(method, t_end=100.0))
    assert tr.status is Status.COMPLETED
    assert np.max(np.abs(tr.states - [0.9, 0, 0])) < 1e-8
    tr = integrate(logistic_field(3.5), [1 - 1 / 3.5, 0, 0], IntegratorConfig(method, t_end=100.0))
    assert np.max(np.abs(tr.states[:, 0] - (1 - 1 / 3.5))) < 1e-8


def test_sampling_grid():
    tr = integrate(logistic_field(3.0), [0.5, 0, 0], IntegratorConfig(t_end=10.0, sample_stride=0.25))
    assert len(tr.times) == 41
    np.testing.assert_allclose(tr.times, 0.25 * np.arange(41), atol=1e-12)
    assert np.all(np.diff(tr.times) > 0)
    assert np.array_equal(tr.states[0], [0.5, 0, 0])


def test_n5_diverges():
    tr = integrate(logistic_field(3.9, 5), [0.3, 0, 0, 0, 0], IntegratorConfig(t_end=200.0))
    assert tr.status is Status.DIVERGED
    assert 0 < tr.at_time < 200
    assert np.all(np.isfinite(tr.states))
    assert np.all(np.abs(tr.states) <= 1e8)


def test_step_failure():
    def rhs(y, p, out):
        out[0] = -0.5 / y[0]

    fld = VectorField(rhs, None, np.zeros(1), 1)
    tr = integrate(fld, [1.0], IntegratorConfig(RK45Adaptive(), t_end=2.0))
    assert tr.status is Status.STEP_FAILURE
    assert tr.at_time == pytest.approx(1.0, abs=1e-6)


def test_rk4_fourth_order():
    ls = linear_system(3, 2.0, 0.3)
    x0 = np.array([0.5, -0.2, 0.1])
    exact = propagate_series(ls, x0, 5.0)
    errs = []
    for h in (0.1, 0.05):
        tr = integrate(ls.field(), x0, IntegratorConfig(RK4Fixed(h), t_end=5.0, sample_stride=5.0))
        errs.append(np.max(np.abs(tr.final_state - exact)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.2)


@pytest.mark.parametrize("fld,x0", [
    (logistic_field(3.0), [0.5, 0, 0]),
    (logistic_field(4.2), [0.5, 0, 0]),
    (ScaledCubic(2 / 3, 0.9).field(), [0.1, 0, 0]),
    (ScaledCubic(*CHAOTIC).field(), [0.1, 0, 0]),
])
def test_adaptive_matches_fine_rk4(fld, x0):
    a = integrate(fld, x0, IntegratorConfig(RK45Adaptive(), t_end=50.0, sample_stride=50.0))
    b = integrate(fld, x0, IntegratorConfig(RK4Fixed(1e-3), t_end=50.0, sample_stride=50.0))
    assert a.status is b.status is Status.COMPLETED
    assert np.max(np.abs(a.final_state - b.final_state)) <= 1e-6 * max(1.0, np.max(np.abs(b.final_state)))


def test_matches_scipy_dense_output():
    fld = ScaledCubic(*CHAOTIC).field()
    cfg = IntegratorConfig(RK45Adaptive(1e-10, 1e-12), t_end=20.0, sample_stride=0.5)
    tr = integrate(fld, [0.1, 0, 0], cfg)
    ref = solve_ivp(lambda t, y: fld(y), (0, 20), [0.1, 0, 0], method="DOP853",
                    rtol=1e-12, atol=1e-14, t_eval=tr.times)
    np.testing.assert_allclose(tr.states, ref.y.T, atol=1e-6)


def test_python_callable_field_is_compiled():
    def rhs(y, p, out):
        out[0] = y[1]
        out[1] = -p[0] * y[0]

    def jac(y, p, out):
        out[0, 0] = 0.0
        out[0, 1] = 1.0
        out[1, 0] = -p[0]
        out[1, 1] = 0.0

    fld = VectorField(rhs, jac, np.array([4.0]), 2)
    tr = integrate(fld, [1.0, 0.0], IntegratorConfig(RK45Adaptive(), t_end=math.pi, sample_stride=math.pi / 4))
    np.testing.assert_allclose(tr.states[:, 0], np.cos(2 * tr.times), atol=1e-8)


def test_lyapunov_stable_fixed_point():
    x_star = 1 - 1 / 3.0
    alpha = linearize(truncate(Logistic(3.0), 3), x_star).alpha
    expect = float(np.max(roots(char_poly(3, to_rational(alpha))).real))
    lam = largest_lyapunov(logistic_field(3.0), [0.5, 0, 0])
    assert lam < 0
    assert lam == pytest.approx(expect, abs=0.05)


def test_lyapunov_periodic_orbit():
    assert abs(largest_lyapunov(logistic_field(4.2), [0.5, 0, 0])) < 0.02
    assert abs(largest_lyapunov(ScaledCubic(2 / 3, 1.1).field(), [0.1, 0, 0])) < 0.02


def test_lyapunov_chaotic_window():
    assert largest_lyapunov(ScaledCubic(*CHAOTIC).field(), [0.1, 0, 0]) > 0.01


def test_lyapunov_diverged():
    with pytest.raises(TrajectoryDiverged) as info:
        largest_lyapunov(logistic_field(3.5, 6), [0.3] + [0] * 5)
    assert info.value.at_time < 100


def test_lyapunov_needs_jacobian():
    def rhs(y, p, out):
        out[0] = -y[0]

    with pytest.raises(DomainError):
        largest_lyapunov(VectorField(rhs, None, np.zeros(1), 1), [1.0])


def test_classify_examples():
    assert classify(logistic_field(3.0), [0.5, 0, 0]).label is Label.FIXED_POINT
    c = classify(logistic_field(4.2), [0.5, 0, 0])
    assert str(c) == "Periodic(1)"
    assert classify(logistic_field(4.05), [0.5, 0, 0]).label is not Label.UNSTABLE
    chaos = classify(ScaledCubic(*CHAOTIC).field(), [0.1, 0, 0])
    assert chaos.label is Label.CHAOTIC and chaos.lyapunov > Thresholds().chaos_tol


@pytest.mark.parametrize("p", [0.5, 1.5, 2.5, 3.0, 3.5, 4.0])
@pytest.mark.parametrize("order", [5, 6])
def test_classify_n5_unstable(p, order):
    assert classify(logistic_field(p, order), [0.3] + [0.0] * (order - 1)).label is Label.UNSTABLE


@pytest.mark.parametrize("fld,x0", [
    (logistic_field(3.0), [0.5, 0, 0]),
    (logistic_field(4.2), [0.5, 0, 0]),
    (ScaledCubic(2 / 3, 1.1).field(), [0.1, 0, 0]),
    (ScaledCubic(2 / 3, 1.2).field(), [0.1, 0, 0]),
    (ScaledCubic(*CHAOTIC).field(), [0.1, 0, 0]),
    (logistic_field(3.0, 5), [0.3, 0, 0, 0, 0]),
])
def test_classification_invariant_under_stride_halving(fld, x0):
    a = classify(fld, x0, IntegratorConfig(sample_stride=0.05))
    b = classify(fld, x0, IntegratorConfig(sample_stride=0.025))
    assert (a.label, a.period) == (b.label, b.period)


def test_peak_period():
    assert peak_period([1, 2] * 10, 1e-9, 16) == 2
    assert peak_period([1.0] * 10, 1e-9, 16) == 1
    assert peak_period([1, 2, 3, 4] * 3, 1e-9, 16) is None  # too few repeats for lag 4
    assert peak_period(list(np.random.default_rng(0).random(200)), 1e-6, 16) is None


def _summary(peaks, troughs=None, lyap=None, speed=1.0):
    peaks = np.asarray(peaks, float)
    troughs = np.asarray(troughs if troughs is not None else -peaks, float)
    return OrbitSummary(Status.COMPLETED, 100.0, peaks, troughs, lyap, np.zeros(3), speed)


def test_classify_summary_rules():
    th = Thresholds()
    assert classify_summary(_summary([1.0] * 20, speed=1e-9), th).label is Label.FIXED_POINT
    assert str(classify_summary(_summary([1.0, 2.0] * 20), th)) == "Periodic(2)"
    rnd = np.random.default_rng(1).random(100) + 1
    assert classify_summary(_summary(rnd, lyap=0.1), th).label is Label.CHAOTIC
    with pytest.raises(InconclusiveWindow):
        classify_summary(_summary([1.0, 2.0, 1.5]), th)
    div = OrbitSummary(Status.DIVERGED, 12.0, np.empty(0), np.empty(0), None, np.zeros(3), math.inf)
    assert classify_summary(div, th).label is Label.UNSTABLE


def test_attractor_class_round_trip():
    for c in (AttractorClass(Label.PERIODIC, 4, 0.001, (1.0, 2.0)), AttractorClass(Label.UNSTABLE)):
        assert AttractorClass.from_dict(c.to_dict()) == c
    with pytest.raises(DomainError):
        AttractorClass(Label.PERIODIC)
