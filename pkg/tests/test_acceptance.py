"""Acceptance gate: one test per advertised criterion.

Each test runs the corresponding checker from zerocrit.acceptance at its
stated tolerance and prints the standard one-line verdict, so `pytest -v`
doubles as the acceptance report.  The statistical criteria (7, 8, 9, 11)
regenerate their Monte Carlo batches and take a few minutes combined; they
are marked slow but run by default.
"""

import os

import pytest

from zerocrit import acceptance

WORKERS = int(os.environ.get("ZEROCRIT_WORKERS", "4") or "4")


def _check(res):
    print(acceptance.format_line(res))
    assert not res["skipped"], res["detail"]
    assert res["passed"], res["detail"]


def test_criterion_01_large_separation_plateau():
    _check(acceptance.criterion_1())


def test_criterion_02_short_range_repulsion():
    _check(acceptance.criterion_2())


def test_criterion_03_quadratic_form_moments():
    _check(acceptance.criterion_3())


def test_criterion_04_monte_carlo_matches_quadrature():
    _check(acceptance.criterion_4())


def test_criterion_05_frame_invariance():
    _check(acceptance.criterion_5())


def test_criterion_06_cm_dual_route():
    _check(acceptance.criterion_6())


@pytest.mark.slow
def test_criterion_07_gaf_correlation_curve():
    _check(acceptance.criterion_7(workers=WORKERS))


@pytest.mark.slow
def test_criterion_08_gaf_intensities():
    _check(acceptance.criterion_8(workers=WORKERS))


@pytest.mark.slow
def test_criterion_09_su2_counts():
    _check(acceptance.criterion_9(workers=WORKERS))


def test_criterion_10_bergman_rescaling_error():
    _check(acceptance.criterion_10())


@pytest.mark.slow
def test_criterion_11_su2_rescaled_curve():
    _check(acceptance.criterion_11(workers=WORKERS))


def test_criterion_12_cli_reproducibility():
    _check(acceptance.criterion_12())
