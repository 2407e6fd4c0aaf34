"""Unit tests for the empirical pair-correlation estimator.

The estimator normalization is validated on synthetic Poisson clouds whose
cross-correlation is known exactly, edge handling by checking the minus
sampling, and the comparison report on curves pushed apart by a known shift.
"""

import numpy as np
import pytest

from zerocrit import correlator, estimator, streams
from zerocrit.errors import BinMismatch, BinningInvalid, TooFewSamples
from zerocrit.gafsim import PointPattern

RHO_ZERO = 1.0 / np.pi
RHO_CRIT = 5.0 / (3.0 * np.pi)


def poisson_pattern(gen, window, rho_z=RHO_ZERO, rho_c=RHO_CRIT):
    """Independent Poisson clouds standing in for zeros and criticals."""

    def cloud(rho):
        n = gen.poisson(rho * np.pi * window**2)
        r = window * np.sqrt(gen.uniform(size=n))
        th = gen.uniform(0.0, 2.0 * np.pi, size=n)
        return r * np.exp(1j * th)

    return PointPattern(
        zeros=cloud(rho_z),
        criticals=cloud(rho_c),
        holo_criticals=np.empty(0, dtype=complex),
        window_radius=window,
        sample_seed=0,
    )


def test_poisson_baseline_is_flat_at_critical_to_zero_ratio():
    # for independent clouds the pair correlation factorizes, so the
    # zero-intensity-squared normalization makes the curve flat at
    # rho_crit/rho_zero^2 / pi^... = 5/3, the same plateau the exact curve
    # approaches at large separation
    gen = streams.generator(31, streams.TAG_SYNTH)
    pats = [poisson_pattern(gen, 10.0) for _ in range(400)]
    edges = np.linspace(0.5, 4.0, 8)
    curve = estimator.estimate_ktilde(pats, edges)
    z = (curve.values - 5.0 / 3.0) / curve.stderr
    assert np.all(np.abs(z) < 4.0), list(z)
    mean_z = z.mean() * np.sqrt(len(z))
    assert abs(mean_z) < 4.0


def test_intensity_recovers_poisson_rates():
    gen = streams.generator(32, streams.TAG_SYNTH)
    pats = [poisson_pattern(gen, 9.0) for _ in range(300)]
    for kind, rho in (("zeros", RHO_ZERO), ("criticals", RHO_CRIT)):
        value, stderr = estimator.intensity(pats, kind)
        assert abs(value - rho) < 4 * stderr


def test_minus_sampling_drops_rim_zeros():
    # a single zero right at the rim must not contribute pairs: its annulus
    # would leave the window
    pat = PointPattern(
        zeros=np.array([7.9 + 0j, 0.0 + 0j]),
        criticals=np.array([0.5 + 0j]),
        holo_criticals=np.empty(0, dtype=complex),
        window_radius=8.0,
        sample_seed=0,
    )
    edges = np.array([0.25, 0.75])
    curve = estimator.estimate_ktilde([pat] * estimator.MIN_PATTERNS, edges)
    # only the origin zero survives erosion (radius 7.25), giving exactly one
    # pair at distance 0.5 per pattern
    assert curve.pair_counts[0] == estimator.MIN_PATTERNS
    expected = np.pi**2 / (np.pi * 7.25**2 * np.pi * (0.75**2 - 0.25**2))
    assert np.isclose(curve.values[0], expected)
    assert curve.stderr[0] == 0.0


def test_estimator_validates_inputs():
    gen = streams.generator(33, streams.TAG_SYNTH)
    pats = [poisson_pattern(gen, 8.0) for _ in range(estimator.MIN_PATTERNS)]
    with pytest.raises(TooFewSamples):
        estimator.estimate_ktilde(pats[:10], np.array([0.5, 1.0]))
    with pytest.raises(BinningInvalid):
        estimator.estimate_ktilde(pats, np.array([1.0, 0.5]))
    with pytest.raises(BinningInvalid):
        # max bin radius beyond half the window
        estimator.estimate_ktilde(pats, np.array([0.5, 4.5]))
    with pytest.raises(ValueError):
        estimator.estimate_ktilde(pats, np.array([0.5, 1.0]), which="other")


def test_compare_curves_accepts_matching_and_flags_shifted():
    gen = streams.generator(34, streams.TAG_SYNTH)
    pats = [poisson_pattern(gen, 10.0) for _ in range(400)]
    edges = np.linspace(0.5, 4.0, 8)
    emp = estimator.estimate_ktilde(pats, edges)
    flat = correlator.ktilde_binned(edges)
    # flat Poisson curve vs the exact structured curve: same plateau but the
    # peak region differs by far more than 4 sigma at these sample sizes
    exact_flat = estimator.CorrelationCurve(
        bin_edges=edges,
        values=np.full(7, 5.0 / 3.0),
        stderr=np.zeros(7),
        pair_counts=np.zeros(7, dtype=int),
        metadata={"kind": "binned"},
    )
    ok = estimator.compare_curves(emp, exact_flat)
    assert ok.passed
    assert ok.max_abs_z <= 4.0
    bad = estimator.compare_curves(emp, flat)
    assert not bad.passed


def test_compare_curves_rejects_mismatched_bins():
    edges = np.linspace(0.5, 4.0, 8)
    c = estimator.CorrelationCurve(
        bin_edges=edges,
        values=np.full(7, 1.0),
        stderr=np.full(7, 0.1),
        pair_counts=np.zeros(7, dtype=int),
        metadata={"kind": "binned"},
    )
    other = estimator.CorrelationCurve(
        bin_edges=edges + 0.1,
        values=np.full(7, 1.0),
        stderr=np.full(7, 0.1),
        pair_counts=np.zeros(7, dtype=int),
        metadata={"kind": "binned"},
    )
    with pytest.raises(BinMismatch):
        estimator.compare_curves(c, other)


def test_curve_csv_roundtrip(tmp_path):
    edges = np.array([0.2, 0.6, 1.0])
    c = estimator.CorrelationCurve(
        bin_edges=edges,
        values=np.array([1.25, 2.5]),
        stderr=np.array([0.1, 0.2]),
        pair_counts=np.array([10, 20]),
        metadata={"kind": "binned"},
    )
    path = tmp_path / "curve.csv"
    c.to_csv(path)
    text = path.read_text()
    assert text.splitlines()[0] == "bin_lo,bin_hi,value,stderr,pairs"
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    assert np.allclose(data[:, 2], c.values)
