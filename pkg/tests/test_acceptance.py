"""Acceptance gate: the nine release criteria, one pass/fail line each.

The criteria run once per session (they share ensembles of trajectories)
and each test asserts a single criterion's verdict, so a red line here
points directly at the broken guarantee. Run with -s to see the lines.
"""

import pytest

from thermolight.acceptance import run_all


@pytest.fixture(scope="module")
def verdicts():
    return {r.index: r for r in run_all()}


def _report(r):
    line = f"{'PASS' if r.passed else 'FAIL'}  criterion {r.index} ({r.name}): {r.detail}"
    print(line)
    assert r.passed, line


def test_criterion_1_sunlight_cooling_rate(verdicts):
    _report(verdicts[1])


def test_criterion_2_top_hat_grayness(verdicts):
    _report(verdicts[2])


def test_criterion_3_integrated_single_mode_power(verdicts):
    _report(verdicts[3])


def test_criterion_4_virtual_temperature(verdicts):
    _report(verdicts[4])


def test_criterion_5_on_axis_radiance_factor(verdicts):
    _report(verdicts[5])


def test_criterion_6_etendue_radiance_closure(verdicts):
    _report(verdicts[6])


def test_criterion_7_spectral_peak_discrimination(verdicts):
    _report(verdicts[7])


def test_criterion_8_simulator_against_oracles(verdicts):
    _report(verdicts[8])


def test_criterion_9_pipeline_round_trip(verdicts):
    _report(verdicts[9])


def test_all_nine_criteria_present(verdicts):
    assert sorted(verdicts) == list(range(1, 10))
