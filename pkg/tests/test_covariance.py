"""Unit tests for the joint covariance construction.

The closed-form Schur complement, the square-root weight matrices, and the
general-frame construction are all cross-checked against direct numerical
linear algebra and against each other.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zerocrit import covariance, numerics
from zerocrit.errors import (
    ArgumentOutOfRange,
    DimensionOutOfRange,
    SeparationOutOfRange,
)

sep = st.floats(min_value=0.01, max_value=6.0, allow_nan=False)


@given(sep)
@settings(max_examples=80, deadline=None)
def test_schur_closed_form_matches_direct_solve(r):
    cov = covariance.build_joint_covariance(r)
    direct = cov.C - cov.B.conj().T @ np.linalg.solve(cov.A, cov.B)
    assert np.allclose(cov.Lambda, 0.5 * (direct + direct.conj().T), atol=1e-9)


@given(sep)
@settings(max_examples=80, deadline=None)
def test_weight_matrices_from_sqrt(r):
    cov = covariance.build_joint_covariance(r)
    S = numerics.psd_sqrt(cov.Lambda)
    assert np.allclose(S @ S, cov.Lambda, atol=1e-10)
    assert np.allclose(cov.M_P, S @ covariance.P_MATRIX @ S, atol=1e-10)
    assert np.allclose(cov.M_Q, S @ covariance.Q_MATRIX @ S, atol=1e-10)
    # traces transfer through the similarity: tr M_P = Lambda_11, and
    # tr M_Q = Lambda_22 - Lambda_33
    assert np.isclose(np.trace(cov.M_P).real, cov.Lambda[0, 0].real, atol=1e-10)
    assert np.isclose(
        np.trace(cov.M_Q).real,
        (cov.Lambda[1, 1] - cov.Lambda[2, 2]).real,
        atol=1e-10,
    )


@given(sep)
@settings(max_examples=50, deadline=None)
def test_detA_positive_and_exact(r):
    cov = covariance.build_joint_covariance(r)
    assert cov.detA > 0
    assert np.isclose(cov.detA, np.exp(r * r) - r * r, rtol=1e-13)


def test_r_zero_degenerates_cleanly():
    cov = covariance.build_joint_covariance(0.0)
    assert np.allclose(cov.Lambda, np.diag([0.0, 2.0, 0.0]))
    assert np.allclose(cov.M_P, 0.0)
    # M_Q = S Q S with S = diag(0, sqrt2, 0): only the (1,1) entry survives
    assert np.allclose(cov.M_Q, np.diag([0.0, 2.0, 0.0]))


def test_large_r_has_uncoupled_envelope():
    cov = covariance.build_joint_covariance(6.0)
    ref = covariance.limit_lambda(6.0)
    scale = np.abs(ref).max()
    assert np.allclose(cov.Lambda, ref, atol=1e-12 * scale)


def test_separation_bounds_enforced():
    with pytest.raises(SeparationOutOfRange):
        covariance.build_joint_covariance(-0.1)
    with pytest.raises(SeparationOutOfRange):
        covariance.build_joint_covariance(6.5)
    with pytest.raises(SeparationOutOfRange):
        covariance.build_joint_covariance(float("nan"))


def _wick_scalar(cov):
    tP = np.trace(cov.M_P).real
    tQ = np.trace(cov.M_Q).real
    tPQ = np.trace(cov.M_P @ cov.M_Q).real
    return (tP * tQ + tPQ) / cov.detA


@given(
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
)
@settings(max_examples=40, deadline=None)
def test_general_frame_reduces_to_reduced_frame(ur, ui, vr, vi):
    u = complex(ur, ui)
    v = complex(vr, vi)
    r = abs(u - v)
    if r < 1e-3:
        return
    gen = covariance.build_general_joint_covariance(u, v)
    red = covariance.build_joint_covariance(r)
    # Individual Lambda entries are frame-dependent, but detA transforms by
    # the documented phase and the Wick scalar (the Gaussian second moment of
    # the weight pair over detA) is a function of r alone.
    phase = np.exp(2.0 * np.real(u * np.conj(v)))
    assert np.isclose(gen.detA / phase, red.detA, rtol=1e-10)
    assert np.isclose(
        _wick_scalar(gen), _wick_scalar(red), rtol=1e-10, atol=1e-12
    )


def test_general_frame_caps_points():
    with pytest.raises(ArgumentOutOfRange):
        covariance.build_general_joint_covariance(6.5, 0.0)


def test_higher_dim_spec_layout():
    spec = covariance.higher_dim_spec(2)
    assert spec.variances == (1.0, 1.0, 2.0, 1.0, 2.0, 1.0)
    assert len(covariance.higher_dim_spec(4).variances) == 15
    with pytest.raises(DimensionOutOfRange):
        covariance.higher_dim_spec(5)
    with pytest.raises(DimensionOutOfRange):
        covariance.higher_dim_spec(0)
