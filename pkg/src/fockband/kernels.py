"""Kernel backend selection.

The compiled extension is used when it was built; set ``FOCKBAND_PURE=1`` to
force the numpy fallback.  :data:`BACKEND` names the active one.
"""

import os

import numpy as np

from . import _core_py

try:
    if os.environ.get("FOCKBAND_PURE"):
        raise ImportError("pure backend requested")
    from . import _core as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _core_py
    BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=float)


def delta3_many(w2, w3, vw, z, backend=None):
    """Secular function ``w2 - z - sum(vw / (w3 - z))`` for each row."""
    impl = _core_py if backend == "python" else _impl
    return impl.delta3_many(_c(w2), _c(w3), _c(vw), _c(z))


def bisect_delta3(w2, w3, vw, lo, hi, tol=1e-12, maxiter=200, backend=None):
    impl = _core_py if backend == "python" else _impl
    return impl.bisect_delta3(_c(w2), _c(w3), _c(vw), _c(lo), _c(hi), float(tol), int(maxiter))
