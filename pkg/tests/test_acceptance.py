"""Acceptance criteria 1-10, one test each.

Each test records a ``[PASS]`` or ``[FAIL]`` line with the measured values;
the lines are printed in an "acceptance criteria" section at the end of the
run.
"""
import pytest

from mapflow.scenarios import SCENARIOS, run_scenario

ORDER = [
    "hurwitz-closed-form",
    "n5-quadratic",
    "n5-instability",
    "root-count",
    "stable-window",
    "linear-oracles",
    "scaled-equivalence",
    "bifurcation-sequence",
    "riddling",
    "determinism",
]


def test_registry_matches_criteria():
    assert sorted(SCENARIOS) == sorted(ORDER)
    assert [SCENARIOS[name][0] for name in ORDER] == list(range(1, 11))


def _check(name, report):
    r = run_scenario(name)
    with_lines = [r.summary()] + ["   " + ln for ln in r.lines]
    print("\n" + "\n".join(with_lines))
    report.extend(with_lines)
    assert r.passed, "\n".join(with_lines)


@pytest.mark.parametrize("name", ORDER[:7])
def test_fast_criterion(name, acceptance_report):
    _check(name, acceptance_report)


def test_criterion_8_bifurcation_sequence(acceptance_report):
    _check("bifurcation-sequence", acceptance_report)


def test_criterion_9_riddling(acceptance_report):
    _check("riddling", acceptance_report)


def test_criterion_10_determinism(acceptance_report):
    _check("determinism", acceptance_report)
