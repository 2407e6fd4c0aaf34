"""Unit tests for polynomial scaling, initialization, and root finding.

all_roots is exercised against construction (polynomials with known roots),
against numpy's companion-matrix solver at moderate degree, and on the two
failure modes that motivated its hardening: roots far beyond the coefficient
overflow radius, and coefficient sets whose limiting accuracy sits above the
step tolerance.
"""

import numpy as np
import pytest

from zerocrit import polytools
from zerocrit.backend import get_kernels
from zerocrit.errors import RootFindingStalled


def from_roots(roots):
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.convolve(c, [-r, 1.0])
    return c


def both_backends():
    return [get_kernels(n)[1] for n in ("compiled", "python")]


def test_scaled_coefficients_normalized():
    log_mags = np.array([0.0, -np.inf, 2.0, 1.0])
    phases = np.exp(1j * np.array([0.1, 0.2, 0.3, 0.4]))
    coeffs, log_max = polytools.scaled_coefficients(log_mags, phases, 2.0)
    assert np.isclose(np.abs(coeffs).max(), 1.0)
    assert coeffs[1] == 0.0
    j = np.arange(4)
    expect = np.exp(log_mags + j * np.log(2.0) - log_max) * phases
    assert np.allclose(coeffs, np.where(np.isfinite(log_mags), expect, 0.0))


def test_trim_counts_both_ends():
    c = np.array([0.0, 0.0, 1.0, 2.0, 1e-80, 0.0])
    core, valuation, dropped = polytools.trim(c)
    assert valuation == 2 and dropped == 2
    assert np.allclose(core, [1.0, 2.0])


def test_bini_init_ring_radii():
    # p(z) = z^4 - 1: single hull edge, all four points on the unit circle
    init = polytools.bini_init(np.array([-1.0, 0, 0, 0, 1.0], dtype=complex))
    assert init.size == 4
    assert np.allclose(np.abs(init), 1.0)
    # widely split scales (z - 0.01)(z - 100): one point per hull edge, at
    # the small and large modulus estimates respectively
    init = polytools.bini_init(np.array([1.0, -100.01, 1.0], dtype=complex))
    assert init.size == 2
    radii = np.sort(np.abs(init))
    assert radii[0] < 0.1 and radii[1] > 10.0


def test_all_roots_known_construction():
    rng = np.random.default_rng(12)
    true = rng.normal(size=24) + 1j * rng.normal(size=24)
    c = from_roots(true)
    for k in both_backends():
        roots = polytools.all_roots(c, k)
        err = np.max(np.abs(np.sort_complex(roots) - np.sort_complex(true)))
        assert err < 1e-8


def test_all_roots_matches_numpy_at_moderate_degree():
    rng = np.random.default_rng(13)
    c = rng.normal(size=81) + 1j * rng.normal(size=81)
    ref = np.sort_complex(np.polynomial.polynomial.polyroots(c))
    for k in both_backends():
        roots = np.sort_complex(polytools.all_roots(c, k))
        assert np.max(np.abs(roots - ref)) < 1e-9


def test_all_roots_reaches_far_roots():
    # roots far beyond the radius where the unreversed Horner overflows; the
    # reversed-evaluation path must still reach and certify them
    rng = np.random.default_rng(14)
    true = np.concatenate(
        [rng.normal(size=40) + 1j * rng.normal(size=40), [30 + 5j, 120.0 - 3j]]
    )
    c = from_roots(true)
    s = 2.5
    core = c * s ** np.arange(len(c))
    core /= np.abs(core).max()
    for k in both_backends():
        roots = polytools.all_roots(core, k) * s
        rel = np.max(
            np.abs(np.sort_complex(roots) - np.sort_complex(true))
            / np.maximum(1.0, np.abs(np.sort_complex(true)))
        )
        assert rel < 1e-6


def test_all_roots_accepts_rounding_floor_configurations():
    # construction noise in these coefficients puts the attainable root
    # accuracy above the step tolerance; the residual-floor stopping rule
    # must accept instead of raising after the iteration budget
    rng = np.random.default_rng(7)
    true = np.concatenate(
        [rng.normal(size=40) + 1j * rng.normal(size=40), [30 + 5j, 120.0 - 3j]]
    )
    c = from_roots(true)
    s = 2.5
    core = c * s ** np.arange(len(c))
    core /= np.abs(core).max()
    for k in both_backends():
        roots = polytools.all_roots(core, k) * s
        assert roots.size == true.size


def test_all_roots_certificate_rejects_garbage():
    class Stub:
        @staticmethod
        def aberth(coeffs, init, max_iter, tol):
            return np.full(len(init), 17.0 + 0j), 1, True

        horner3 = staticmethod(get_kernels("python")[1].horner3)

    c = np.array([1.0, 0.0, 1.0], dtype=complex)  # roots at +-i
    with pytest.raises(RootFindingStalled):
        polytools.all_roots(c, Stub())


def test_dedupe_sorted_clusters_and_counts():
    pts = np.array([1.0, 1.0 + 1e-9j, 2.0, 2.0 + 5e-10, -1.0j])
    uniq, mult = polytools.dedupe_sorted(pts, 1e-6)
    assert uniq.size == 3
    assert sorted(mult.tolist()) == [1, 2, 2]


def test_circle_max_scale():
    vals = polytools.circle_max(lambda z: z, np.array([0.0 + 0j]), rho=0.25)
    assert np.isclose(vals[0], 0.25)
