"""Pure-numpy versions of the kernels in ``_core.pyx`` (same signatures)."""

import numpy as np


def delta3_many(w2, w3, vw, z):
    z = np.asarray(z, dtype=float)
    return w2 - z - np.sum(vw / (w3 - z[:, None]), axis=1)


def bisect_delta3(w2, w3, vw, lo, hi, tol, maxiter):
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    for _ in range(maxiter):
        active = b - a > tol
        if not active.any():
            break
        mid = 0.5 * (a + b)
        active &= (mid > a) & (mid < b)
        if not active.any():
            break
        pos = delta3_many(w2, w3, vw, mid) > 0.0
        a = np.where(active & pos, mid, a)
        b = np.where(active & ~pos, mid, b)
    return 0.5 * (a + b)
