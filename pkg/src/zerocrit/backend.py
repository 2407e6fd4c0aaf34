"""Kernel backend selection: compiled extension if available, numpy fallback.

The two implementations share signatures and status codes.  Selection order:
the ZEROCRIT_BACKEND environment variable ("compiled" or "python") wins; with
no override the compiled extension is used when it imports.  Each backend is
individually deterministic; outputs agree across backends to roundoff of the
certified points, not bit-for-bit.
"""

import os

from . import _kernels_py

_ENV_VAR = "ZEROCRIT_BACKEND"

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def get_kernels(name=None):
    """Return (backend_name, module) honoring the explicit or env override."""
    if name is None:
        name = os.environ.get(_ENV_VAR, "").strip() or None
    if name is None:
        name = "compiled" if _compiled is not None else "python"
    if name == "compiled":
        if _compiled is None:
            raise ImportError(
                "compiled kernel backend requested but the extension is not built"
            )
        return "compiled", _compiled
    if name == "python":
        return "python", _kernels_py
    raise ValueError(f"unknown backend {name!r}; expected 'compiled' or 'python'")


def backend_name():
    return get_kernels()[0]
