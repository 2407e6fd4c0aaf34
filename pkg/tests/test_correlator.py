"""Unit tests for the correlation evaluators.

The closed-form quadratic-absolute moments are pinned against hand-derived
exponential-moment constants, the quadrature curve against frozen regression
values, and every closed-form route against an independent route (plain
Monte Carlo, the numerical double integral, or the alternate estimator).
"""

import numpy as np
import pytest

from zerocrit import correlator, covariance, streams
from zerocrit.covariance import build_joint_covariance
from zerocrit.errors import ArgumentOutOfRange, TooFewSamples

P3 = np.diag([1.0, 0.0, 0.0]).astype(complex)


def diag3(a, b, c):
    return np.diag([a, b, c]).astype(complex)


def test_exponential_moment_constants():
    # With xi standard complex normal, |xi_i|^2 are iid Exp(1); the four
    # fixtures below reduce to E[X|Y-Z|] = 1, E[X|2Y-Z|] = 5/3,
    # E[X|2Y-X|] = 16/9 and E[Y|2Y-Z|] = 29/9.
    cases = [
        (P3, diag3(0, 1, -1), 1.0),
        (P3, diag3(0, 2, -1), 5.0 / 3.0),
        (P3, diag3(-1, 2, 0), 16.0 / 9.0),
        (diag3(0, 1, 0), diag3(0, 2, -1), 29.0 / 9.0),
    ]
    for M_P, M_Q, exact in cases:
        got = correlator.quadratic_abs_expectation(M_P, M_Q)
        assert abs(got - exact) < 1e-12, (exact, got)


def _mc_reference(M_P, M_Q, samples, seed):
    gen = streams.generator(seed, streams.TAG_SYNTH)
    xi = streams.complex_normals(gen, (samples, 3))
    qp = np.einsum("si,ij,sj->s", xi.conj(), M_P, xi).real
    qq = np.einsum("si,ij,sj->s", xi.conj(), M_Q, xi).real
    vals = qp * np.abs(qq)
    return vals.mean(), vals.std(ddof=1) / np.sqrt(samples)


def test_closed_form_against_plain_monte_carlo():
    rng = np.random.default_rng(42)
    G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    M_P = G @ G.conj().T / 3.0
    H = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    M_Q = 0.5 * (H + H.conj().T)
    # force rank 2 so the hypoexponential closed form is exercised
    vals, U = np.linalg.eigh(M_Q)
    vals[0] = 0.0
    M_Q = (U * vals) @ U.conj().T
    exact = correlator.quadratic_abs_expectation(M_P, M_Q)
    mc, se = _mc_reference(M_P, M_Q, 400_000, seed=101)
    assert abs(exact - mc) < 5 * se


def test_full_rank_integral_against_plain_monte_carlo():
    # rank-3 sign-indefinite M_Q falls through to the numerical double
    # integral; check it against brute-force sampling
    M_P = diag3(0.7, 0.2, 0.1)
    M_Q = diag3(1.0, 0.5, -0.8)
    exact = correlator.quadratic_abs_expectation(M_P, M_Q)
    mc, se = _mc_reference(M_P, M_Q, 400_000, seed=202)
    assert abs(exact - mc) < 5 * se


FROZEN = {
    0.03: 0.0072024207594452066,
    0.1: 0.080287234332613228,
    0.5: 1.9632462876239887,
    1.0: 1.8190630117648117,
    2.0: 1.5793249542133831,
    3.0: 1.6901266156022363,
}


def test_quadrature_frozen_values():
    for r, val in FROZEN.items():
        got = correlator.ktilde_quadrature(build_joint_covariance(r)).value
        assert abs(got - val) < 1e-12 * max(1.0, abs(val)), (r, got)


def test_quadrature_vanishes_at_zero_separation():
    assert correlator.ktilde_quadrature(build_joint_covariance(0.0)).value == 0.0


def test_long_range_plateau():
    for r in (5.0, 6.0):
        got = correlator.ktilde_quadrature(build_joint_covariance(r)).value
        assert abs(got - 5.0 / 3.0) < 1e-5


def test_short_range_quadratic_scaling():
    # near zero the correlation is quadratic in r, so K(0.03)/K(0.1) must
    # sit within a few percent of (0.3)^2
    ratio = FROZEN[0.03] / FROZEN[0.1]
    got = (
        correlator.ktilde_quadrature(build_joint_covariance(0.03)).value
        / correlator.ktilde_quadrature(build_joint_covariance(0.1)).value
    )
    assert abs(got - ratio) < 1e-12
    assert abs(got - 0.09) < 0.05 * 0.09


def test_frame_invariance_single_pair():
    u, v = 0.7 + 0.4j, -0.3 + 1.1j
    gen = covariance.build_general_joint_covariance(u, v)
    red = build_joint_covariance(abs(u - v))
    a = correlator.ktilde_quadrature(gen).value
    b = correlator.ktilde_quadrature(red).value
    assert abs(a - b) < 1e-6 * max(1.0, abs(b))


def test_monte_carlo_reproducible_and_consistent():
    cov = build_joint_covariance(1.0)
    a = correlator.ktilde_monte_carlo(cov, 200_000, seed=7)
    b = correlator.ktilde_monte_carlo(cov, 200_000, seed=7)
    assert a.value == b.value and a.stderr == b.stderr
    exact = correlator.ktilde_quadrature(cov).value
    assert abs(a.value - exact) < 5 * a.stderr
    c = correlator.ktilde_monte_carlo(cov, 200_000, seed=8)
    assert c.value != a.value


def test_monte_carlo_stderr_scales_inverse_sqrt():
    cov = build_joint_covariance(1.0)
    small = correlator.ktilde_monte_carlo(cov, 50_000, seed=3)
    large = correlator.ktilde_monte_carlo(cov, 800_000, seed=3)
    ratio = small.stderr / large.stderr
    assert 3.0 < ratio < 5.3  # expect 4 = sqrt(16) up to sampling noise


def test_monte_carlo_rejects_tiny_sample_counts():
    cov = build_joint_covariance(1.0)
    with pytest.raises(TooFewSamples):
        correlator.ktilde_monte_carlo(cov, 100, seed=1)


def test_quadrature_tolerance_validated():
    cov = build_joint_covariance(1.0)
    with pytest.raises(ArgumentOutOfRange):
        correlator.ktilde_quadrature(cov, tol=0.0)
    with pytest.raises(ArgumentOutOfRange):
        correlator.ktilde_quadrature(cov, tol=1e-1)


def test_curve_and_binned_shapes():
    grid = np.array([0.5, 1.0, 2.0])
    curve = correlator.ktilde_curve(grid)
    assert [round(v, 10) for v in curve.values] == [
        round(FROZEN[r], 10) for r in grid
    ]
    edges = np.array([0.5, 1.0, 1.5])
    binned = correlator.ktilde_binned(edges)
    assert binned.values.size == 2
    # bin averages sit between the endpoint values of a smooth curve
    lo = correlator.ktilde_quadrature(build_joint_covariance(0.5)).value
    mid = correlator.ktilde_quadrature(build_joint_covariance(1.0)).value
    peak = correlator.ktilde_quadrature(build_joint_covariance(0.75)).value
    assert min(lo, mid) < binned.values[0] < max(peak, lo, mid)


def test_cm_dual_route_agreement():
    for m in (1, 2):
        a = correlator.cm_estimate(m, 200_000, seed=5)
        b = correlator.cm_estimate_direct(m, 200_000, seed=6)
        z = abs(a.value - b.value) / np.hypot(a.stderr, b.stderr)
        assert z < 4.0, (m, a.value, b.value, z)


def test_cm_minimum_samples():
    with pytest.raises(TooFewSamples):
        correlator.cm_estimate(1, 1000, seed=1)
