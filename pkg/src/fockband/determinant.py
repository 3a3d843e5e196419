"""Fredholm determinants of the fiber operators and the 4x4 coefficient matrix.

All torus integrals use the rectangle rule of :mod:`fockband.model`, so every
quantity here is the exact determinant of the corresponding discretized fiber.

Argument order is kept as written in the source formulas: ``delta1`` and
``delta2`` integrate ``delta3(p, s; z)`` over the *second* slot, while the
``a22`` entry of the coefficient matrix integrates ``delta3(s, p; z)`` over the
first.  The two agree whenever ``w2`` and ``w3`` are symmetric in their first
two arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .model import ModelProblem

__all__ = ["DomainError", "NearSingularError", "CoeffMatrix", "DeterminantEvaluator"]

BAND_GUARD = 1e-12
SINGULAR_TOL = 1e-12


class DomainError(ValueError):
    """The spectral parameter lies inside a band where a determinant is undefined."""


class NearSingularError(DomainError):
    """The coefficient matrix is numerically singular at the requested point."""


@dataclass(frozen=True)
class CoeffMatrix:
    """4x4 matrix at a fixed ``(p, z)``; sector order ``(f0, f1, c1, c2)``."""

    a: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.a))

    def __matmul__(self, other: "CoeffMatrix") -> np.ndarray:
        return self.a @ other.a


class DeterminantEvaluator:
    """Evaluates ``delta3``, ``delta1``, ``delta2`` and the coefficient matrix.

    Parameters
    ----------
    problem : ModelProblem
    check : bool
        When true (default) every public evaluation first verifies that `z` is
        admissible against the band sets computed by :mod:`fockband.channel`.
    """

    def __init__(self, problem: ModelProblem, check: bool = True):
        self.problem = problem
        self.check = check
        wt = problem.weight
        self.vw3 = wt * problem.v3**2
        self.vw21 = wt * problem.v21**2
        self.vw22 = wt * problem.v22**2
        self.vw2 = wt * problem.v2**2
        self.vw2_22 = wt * problem.v2 * problem.v22
        self.m3 = problem.w3.min(axis=2)
        self.M3 = problem.w3.max(axis=2)
        self._channel = None

    @property
    def channel(self):
        if self._channel is None:
            from .channel import ChannelAnalysis

            self._channel = ChannelAnalysis(self.problem, evaluator=self)
        return self._channel

    # -- delta3 ------------------------------------------------------------

    def delta3(self, p: int, q: int, z: float) -> float:
        """``w2(p,q) - z - int v3(s)^2 / (w3(p,q,s) - z) ds``."""
        lo, hi = self.m3[p, q], self.M3[p, q]
        if lo - BAND_GUARD <= z <= hi + BAND_GUARD:
            raise DomainError(f"z={z!r} lies in the fiber band [{lo!r}, {hi!r}] at (p, q)=({p}, {q})")
        w2 = self.problem.w2[p, q : q + 1]
        w3 = self.problem.w3[p, q][None, :]
        return float(kernels.delta3_many(w2, w3, self.vw3, np.array([z], dtype=float))[0])

    def delta3_row(self, p: int, z) -> np.ndarray:
        """``delta3(p, s; z)`` for every node ``s``; `z` scalar or 1-d array.

        Returns shape ``(N,)`` or ``(len(z), N)``.  No admissibility check.
        """
        return self._delta3_lines(self.problem.w2[p], self.problem.w3[p], z)

    def delta3_col(self, q: int, z) -> np.ndarray:
        """``delta3(s, q; z)`` for every node ``s``.  No admissibility check."""
        return self._delta3_lines(self.problem.w2[:, q], self.problem.w3[:, q], z)

    def delta3_all(self, z: float) -> np.ndarray:
        """``delta3(p, q; z)`` on the whole grid, shape ``(N, N)``."""
        N = self.problem.N
        w3 = self.problem.w3.reshape(N * N, N)
        zz = np.full(N * N, float(z))
        return kernels.delta3_many(self.problem.w2.ravel(), w3, self.vw3, zz).reshape(N, N)

    def _delta3_lines(self, w2, w3, z):
        z = np.asarray(z, dtype=float)
        if z.ndim == 0:
            return kernels.delta3_many(w2, w3, self.vw3, np.full(w2.shape, float(z)))
        zc = z[:, None, None]
        return w2[None, :] - z[:, None] - np.sum(self.vw3 / (w3[None, :, :] - zc), axis=2)

    # -- two-particle determinants -------------------------------------------

    def _check_fiber(self, p: int, z: float, transpose: bool = False):
        if not self.check:
            return
        bands = self.channel.ess_fiber12(p, transpose=transpose)
        if bands.contains(z, BAND_GUARD):
            which = "transposed fiber set" if transpose else "sigma_ess(h1(p))"
            raise DomainError(f"z={z!r} lies in {which} at p={p}")

    def delta1(self, p: int, z: float) -> float:
        """``1 - int v21(s)^2 / delta3(p, s; z) ds``."""
        self._check_fiber(p, z)
        return float(self.delta1_many(p, np.array([z]))[0])

    def delta1_many(self, p: int, z) -> np.ndarray:
        d3 = self.delta3_row(p, np.atleast_1d(np.asarray(z, dtype=float)))
        return 1.0 - np.sum(self.vw21 / d3, axis=-1)

    def delta2(self, p: int, z: float) -> float:
        """Determinant of the 2x2 system for ``(f1, c2)`` at fixed ``p``."""
        self._check_fiber(p, z)
        return float(self.delta2_many(p, np.array([z]))[0])

    def delta2_many(self, p: int, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        inv = 1.0 / self.delta3_row(p, z)
        a33 = 1.0 - inv @ self.vw22
        a11 = self.problem.w1[p] - z - inv @ self.vw2
        a13 = inv @ self.vw2_22
        return a33 * a11 - a13 * a13

    # -- coefficient matrix ----------------------------------------------------

    def entries(self, z: float) -> dict[str, np.ndarray]:
        """``a11, a13, a22, a33`` at every grid node ``p`` (no checks)."""
        inv = 1.0 / self.delta3_all(z)
        return {
            "a11": self.problem.w1 - z - inv @ self.vw2,
            "a13": inv @ self.vw2_22,
            "a22": 1.0 - self.vw21 @ inv,
            "a33": 1.0 - inv @ self.vw22,
        }

    def _entries_at(self, p: int, z: float) -> tuple[float, float, float, float]:
        row = 1.0 / self.delta3_row(p, z)
        col = 1.0 / self.delta3_col(p, z)
        a11 = self.problem.w1[p] - z - row @ self.vw2
        a13 = row @ self.vw2_22
        a22 = 1.0 - col @ self.vw21
        a33 = 1.0 - row @ self.vw22
        return float(a11), float(a13), float(a22), float(a33)

    def coeff_matrix(self, p: int, z: float) -> CoeffMatrix:
        self._check_fiber(p, z)
        self._check_fiber(p, z, transpose=True)
        a11, a13, a22, a33 = self._entries_at(p, z)
        a = np.zeros((4, 4))
        a[0, 0] = 1.0
        a[1, 1], a[1, 3], a[3, 1], a[3, 3] = a11, a13, a13, a33
        a[2, 2] = a22
        return CoeffMatrix(a)

    def coeff_inverse(self, p: int, z: float) -> CoeffMatrix:
        """Closed-form inverse of :meth:`coeff_matrix`.

        ``b22`` is taken as ``1 / a22``; it equals ``1 / delta1`` under the
        symmetric argument convention.
        """
        self._check_fiber(p, z)
        self._check_fiber(p, z, transpose=True)
        a11, a13, a22, a33 = self._entries_at(p, z)
        d2 = a11 * a33 - a13 * a13
        if abs(d2) <= SINGULAR_TOL or abs(a22) <= SINGULAR_TOL:
            raise NearSingularError(
                f"coefficient matrix near-singular at p={p}, z={z!r} (delta2={d2:.3e}, a22={a22:.3e})"
            )
        b = np.zeros((4, 4))
        b[0, 0] = 1.0
        b[1, 1] = a33 / d2
        b[1, 3] = b[3, 1] = -a13 / d2
        b[2, 2] = 1.0 / a22
        b[3, 3] = a11 / d2
        return CoeffMatrix(b)

    # -- scans -----------------------------------------------------------------

    def scan_delta3(self, p: int, q: int, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=float)
        out = np.full(zs.shape, np.nan)
        ok = (zs < self.m3[p, q] - BAND_GUARD) | (zs > self.M3[p, q] + BAND_GUARD)
        if ok.any():
            w2, w3 = self.problem.w2[p, q : q + 1], self.problem.w3[p, q][None, :]
            out[ok] = self._delta3_lines(w2, w3, zs[ok])[:, 0]
        return out

    def scan_delta12(self, p: int, zs) -> tuple[np.ndarray, np.ndarray]:
        zs = np.asarray(zs, dtype=float)
        bands = self.channel.ess_fiber12(p)
        ok = ~np.asarray(bands.contains(zs, BAND_GUARD), dtype=bool)
        d1 = np.full(zs.shape, np.nan)
        d2 = np.full(zs.shape, np.nan)
        if ok.any():
            d1[ok] = self.delta1_many(p, zs[ok])
            d2[ok] = self.delta2_many(p, zs[ok])
        return d1, d2

    @cached_property
    def scale(self) -> float:
        return max(1.0, self.problem.spectral_bound())
