"""Cross-backend contract tests for the compiled and numpy kernels."""

import os
import subprocess
import sys

import numpy as np
import pytest

from zerocrit import backend


def _kernels():
    names = backend.available_backends()
    if "compiled" not in names:
        pytest.skip("compiled extension not built")
    return backend.get_kernels("compiled")[1], backend.get_kernels("python")[1]


def test_selection_and_env_override():
    name, _ = backend.get_kernels()
    assert name in ("compiled", "python")
    assert backend.get_kernels("python")[0] == "python"
    with pytest.raises(ValueError):
        backend.get_kernels("fortran")
    env = dict(os.environ, ZEROCRIT_BACKEND="python")
    out = subprocess.run(
        [sys.executable, "-c",
         "from zerocrit import backend; print(backend.backend_name())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"


def test_horner3_agrees_bitwise_on_moderate_inputs():
    comp, py = _kernels()
    rng = np.random.default_rng(1)
    c = rng.normal(size=40) + 1j * rng.normal(size=40)
    z = rng.normal(size=100) * 0.8 + 1j * rng.normal(size=100) * 0.8
    for a, b in zip(comp.horner3(c, z), py.horner3(c, z)):
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


def test_status_codes_shared():
    comp, py = _kernels()
    assert (comp.OK, comp.ESCAPED, comp.SINGULAR, comp.NO_CONVERGENCE) == (
        py.OK, py.ESCAPED, py.SINGULAR, py.NO_CONVERGENCE
    )


def test_newton_connection_agreement():
    comp, py = _kernels()
    rng = np.random.default_rng(2)
    c = (rng.normal(size=30) + 1j * rng.normal(size=30)) / np.sqrt(
        np.arange(1, 31)
    )
    seeds = rng.normal(size=60) + 1j * rng.normal(size=60)
    for mode, fs_n in ((0, 0.0), (1, 29.0)):
        za, sa = comp.newton_connection(c, seeds, mode, fs_n, 80, 1e-13, 4.0)
        zb, sb = py.newton_connection(c, seeds, mode, fs_n, 80, 1e-13, 4.0)
        assert np.array_equal(sa, sb)
        ok = sa == comp.OK
        assert ok.sum() > 0
        assert np.allclose(za[ok], zb[ok], atol=1e-10)


def test_aberth_agreement_and_determinism():
    comp, py = _kernels()
    rng = np.random.default_rng(3)
    c = rng.normal(size=60) + 1j * rng.normal(size=60)
    from zerocrit.polytools import bini_init

    init = bini_init(c)
    ra, ia, ca = comp.aberth(c, init, 400, 1e-12)
    rb, ib, cb = py.aberth(c, init, 400, 1e-12)
    assert ca and cb
    assert np.max(np.abs(np.sort_complex(ra) - np.sort_complex(rb))) < 1e-9
    ra2, ia2, _ = comp.aberth(c, init, 400, 1e-12)
    assert np.array_equal(ra, ra2) and ia == ia2


def test_newton_polish_agreement():
    comp, py = _kernels()
    c = np.array([-1.0, 0.0, 0.0, 1.0], dtype=complex)  # cube roots of unity
    seeds = np.array([1.1, -0.4 + 0.9j, -0.6 - 0.8j])
    za, sa = comp.newton_polish(c, seeds, 50, 1e-14)
    zb, sb = py.newton_polish(c, seeds, 50, 1e-14)
    assert np.array_equal(sa, sb)
    assert np.allclose(za, zb, atol=1e-14)
    assert np.allclose(np.sort_complex(za) ** 3, 1.0, atol=1e-12)
