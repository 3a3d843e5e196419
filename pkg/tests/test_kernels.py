import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockband import kernels


def _rows(rng, m, k):
    w2 = rng.uniform(-2, 2, m)
    w3 = rng.uniform(0, 3, (m, k))
    vw = rng.uniform(0.01, 1, k)
    return w2, w3, vw


@given(st.integers(1, 20), st.integers(1, 12), st.integers(0, 2**31))
def test_delta3_backends_agree(m, k, seed):
    rng = np.random.default_rng(seed)
    w2, w3, vw = _rows(rng, m, k)
    z = w3.min(axis=1) - rng.uniform(0.01, 5, m)
    ref = w2 - z - np.sum(vw / (w3 - z[:, None]), axis=1)
    for backend in (None, "python"):
        np.testing.assert_allclose(kernels.delta3_many(w2, w3, vw, z, backend=backend), ref, rtol=1e-13, atol=1e-13)


@given(st.integers(1, 20), st.integers(1, 12), st.integers(0, 2**31))
def test_bisection_roots(m, k, seed):
    rng = np.random.default_rng(seed)
    w2, w3, vw = _rows(rng, m, k)
    hi = w3.min(axis=1) - 1e-12
    lo = np.minimum(w2, hi) - 1.0 - vw.sum() / 1e-3
    roots = {b: kernels.bisect_delta3(w2, w3, vw, lo, hi, backend=b) for b in (None, "python")}
    np.testing.assert_allclose(roots[None], roots["python"], atol=1e-11)
    # delta3 is decreasing below the band: sign change brackets the root
    f_lo = kernels.delta3_many(w2, w3, vw, roots[None] - 1e-9)
    f_hi = kernels.delta3_many(w2, w3, vw, np.minimum(roots[None] + 1e-9, hi))
    assert np.all(f_lo >= -1e-6) and np.all(f_hi <= 1e-6)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_fallback_runs():
    import os
    import subprocess
    import sys

    code = (
        "from fockband import kernels\n"
        "from fockband.verify import check_closed_form\n"
        "assert kernels.BACKEND == 'python'\n"
        "assert check_closed_form()[0]\n"
    )
    env = {**os.environ, "FOCKBAND_PURE": "1"}
    subprocess.run([sys.executable, "-c", code], check=True, env=env)
