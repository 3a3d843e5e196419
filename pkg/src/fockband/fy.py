"""Reduction of the eigenvalue problem to ``T(z) psi = psi`` on four one-particle sectors.

The reduced unknown is ``psi = (f0, f1, c1, c2)`` in nodal values, with

    c1(q) = int v21(s) f2(s, q) ds,     c2(p) = int v22(s) f2(p, s) ds.

``A(z)`` and ``K(z)`` can be built two ways.  ``literal`` writes out the
closed-form coefficient functions and kernels.  ``derived`` performs the same
eliminations as dense Schur complements on the assembled operator blocks, so
it is exactly equivalent to the discretized eigenproblem by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .channel import ChannelAnalysis
from .determinant import BAND_GUARD, SINGULAR_TOL, DomainError
from .model import ModelProblem
from .oracle import Blocks, assemble_full

__all__ = ["ReducedSystem", "EigvecBundle", "FYSolver"]

SCAN_POINTS = 200
ROOT_TOL = 1e-12
ACCEPT_TOL = 1e-8
MERGE_GAP = 1e-6
RESIDUAL_TOL = 1e-8

# block positions of A(z) and K(z); (0, 0) belongs to both
A_BLOCKS = ((0, 0), (1, 1), (1, 3), (2, 2), (3, 1), (3, 3))
K_BLOCKS = ((0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2))


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    z: float
    mode: str
    A: np.ndarray
    K: np.ndarray
    N: int
    Ainv: np.ndarray | None = None

    def sl(self, i: int) -> slice:
        if i == 0:
            return slice(0, 1)
        return slice(1 + (i - 1) * self.N, 1 + i * self.N)

    def block(self, name: str, i: int, j: int) -> np.ndarray:
        return getattr(self, name)[self.sl(i), self.sl(j)]

    @cached_property
    def T(self) -> np.ndarray:
        if self.Ainv is not None:
            return self.Ainv @ self.K
        return np.linalg.solve(self.A, self.K)

    @property
    def dim(self) -> int:
        return 1 + 3 * self.N


@dataclass(frozen=True, eq=False)
class EigvecBundle:
    z: float
    psi: np.ndarray
    full: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    residual: float
    multiplicity: int = 1
    distance: float = field(default=float("nan"))

    @property
    def sector_norms(self) -> tuple[float, ...]:
        return tuple(float(np.linalg.norm(f)) for f in self.full)


class FYSolver:
    """Locates eigenvalues of the operator off the channel spectra."""

    def __init__(self, problem: ModelProblem, channel: ChannelAnalysis | None = None):
        self.problem = problem
        self.channel = channel if channel is not None else ChannelAnalysis(problem)
        self.det = self.channel.det
        self.N = problem.N

    @cached_property
    def excluded(self):
        return self.channel.essential_spectrum()[0]

    @cached_property
    def blocks(self) -> Blocks:
        return Blocks(self.problem)

    @cached_property
    def full_operator(self):
        return assemble_full(self.problem)

    def check(self, z: float):
        if self.excluded.contains(z, BAND_GUARD):
            raise DomainError(f"z={z!r} lies in the union of the channel spectra")

    # -- construction ------------------------------------------------------------

    def reduced_system(self, z: float, mode: str = "derived", check: bool = True) -> ReducedSystem:
        z = float(z)
        if check:
            self.check(z)
        if mode == "literal":
            return self._literal(z)
        if mode == "derived":
            return self._derived(z)
        raise ValueError(f"mode must be 'literal' or 'derived', got {mode!r}")

    def _literal(self, z: float) -> ReducedSystem:
        P, N, wt = self.problem, self.N, self.problem.weight
        d3 = self.det.delta3_all(z)
        if np.min(np.abs(d3)) <= SINGULAR_TOL:
            raise DomainError(f"delta3 vanishes on the grid at z={z!r}")
        inv = 1.0 / d3
        e = self.det.entries(z)
        d2 = e["a11"] * e["a33"] - e["a13"] ** 2
        if min(np.min(np.abs(d2)), np.min(np.abs(e["a22"]))) <= SINGULAR_TOL:
            raise DomainError(f"coefficient matrix near-singular at z={z!r}")

        dim = 1 + 3 * N
        A = np.zeros((dim, dim))
        K = np.zeros((dim, dim))
        Ainv = np.zeros((dim, dim))
        s1, s2, s3 = (slice(1 + k * N, 1 + (k + 1) * N) for k in range(3))
        i1, i2, i3 = (np.arange(1 + k * N, 1 + (k + 1) * N) for k in range(3))

        A[0, 0] = 1.0
        A[i1, i1] = e["a11"]
        A[i1, i3] = e["a13"]
        A[i3, i1] = e["a13"]
        A[i2, i2] = e["a22"]
        A[i3, i3] = e["a33"]

        Ainv[0, 0] = 1.0
        Ainv[i1, i1] = e["a33"] / d2
        Ainv[i1, i3] = -e["a13"] / d2
        Ainv[i3, i1] = -e["a13"] / d2
        Ainv[i2, i2] = 1.0 / e["a22"]
        Ainv[i3, i3] = e["a11"] / d2

        v1, v2, v21, v22 = P.v1, P.v2, P.v21, P.v22
        K[0, 0] = P.w0 - z + 1.0
        K[0, s1] = wt * v1
        K[s1, 0] = -v1
        # kernels: rows indexed by the output node, columns by the integration node
        K[s1, s2] = -wt * v21[:, None] * v2[None, :] * inv
        K[s2, s1] = -wt * v2[:, None] * v21[None, :] * inv.T
        K[s2, s3] = wt * v22[:, None] * v21[None, :] * inv.T
        K[s3, s2] = wt * v21[:, None] * v22[None, :] * inv
        return ReducedSystem(z, "literal", A, K, N, Ainv)

    def _derived(self, z: float) -> ReducedSystem:
        B, N, P = self.blocks, self.N, self.problem
        wt, sw = P.weight, np.sqrt(P.weight)
        d3 = B.d3 - z
        if np.min(np.abs(d3)) <= SINGULAR_TOL:
            raise DomainError(f"z={z!r} coincides with a four-particle energy")
        # eliminate sector 3: f3 = -(H33 - z)^-1 H32 f2
        D = np.diag(B.d2 - z) - (B.H23 / d3[None, :]) @ B.H23.T
        eye = np.eye(N)
        G1 = np.kron(P.v21[None, :], eye)
        G2 = np.kron(eye, P.v22[None, :])
        E1 = np.kron(wt * P.v21[:, None], eye)
        E2 = np.kron(eye, wt * P.v22[:, None])
        H21 = B.H12.T
        X = sla.solve(D, np.hstack([H21, E1, E2]))
        XH, X1, X2 = X[:, :N], X[:, N : 2 * N], X[:, 2 * N :]

        M = np.zeros((1 + 3 * N, 1 + 3 * N))
        s1, s2, s3 = (slice(1 + k * N, 1 + (k + 1) * N) for k in range(3))
        M[0, 0] = -(P.w0 - z)
        M[0, s1] = -B.H01[0]
        M[s1, 0] = B.H01[0]
        M[s1, s1] = np.diag(P.w1 - z) - B.H12 @ XH
        M[s1, s2] = B.H12 @ X1
        M[s1, s3] = B.H12 @ X2
        M[s2, s1] = G1 @ XH
        M[s2, s2] = eye - G1 @ X1
        M[s2, s3] = -G1 @ X2
        M[s3, s1] = G2 @ XH
        M[s3, s2] = -G2 @ X1
        M[s3, s3] = eye - G2 @ X2
        # scaled f1 -> nodal f1; scaled first-sector equation -> nodal equation
        M[:, s1] *= sw
        M[s1, :] /= sw

        A = np.zeros_like(M)
        K = np.zeros_like(M)
        sec = [slice(0, 1), s1, s2, s3]
        for i, j in A_BLOCKS[1:]:
            A[sec[i], sec[j]] = M[sec[i], sec[j]]
        for i, j in K_BLOCKS[1:]:
            K[sec[i], sec[j]] = -M[sec[i], sec[j]]
        A[0, 0] = 1.0
        K[0, 0] = 1.0 - M[0, 0]
        return ReducedSystem(z, "derived", A, K, N)

    # -- eigenvalue location -----------------------------------------------------------

    def eig_distance(self, z: float, mode: str = "derived") -> float:
        """Distance from 1 to the spectrum of ``T(z)``."""
        T = self.reduced_system(z, mode).T
        return float(np.min(np.abs(1.0 - np.linalg.eigvals(T))))

    def _probe(self, z: float) -> tuple[float, float]:
        """Sign of ``det(I - T(z))`` and the smallest singular value of ``I - T(z)``."""
        T = self.reduced_system(z, "derived", check=False).T
        IT = np.eye(T.shape[0]) - T
        sign, _ = np.linalg.slogdet(IT)
        smin = float(sla.svdvals(IT)[-1])
        return float(sign), smin

    def search_intervals(self, tol: float | None = None) -> list[tuple[float, float]]:
        """Complement of the channel spectra (dilated by `tol`) inside the spectral bound."""
        bound = self.channel.bound
        ess = self.excluded if tol is None else self.excluded.dilate(tol)
        return ess.complement(-bound, bound, guard=max(BAND_GUARD, 1e-9))

    def find_eigenvalues(self, intervals=None, scan_points: int = SCAN_POINTS) -> list[EigvecBundle]:
        """Eigenvalues of the operator inside the given open intervals."""
        if intervals is None:
            intervals = self.search_intervals()
        cands = []
        for a, b in intervals:
            zs = np.linspace(a, b, scan_points)
            probes = [self._probe(z) for z in zs]
            sign = np.array([p[0] for p in probes])
            smin = np.array([p[1] for p in probes])
            for k in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
                cands.append(self._bisect_sign(zs[k], zs[k + 1], sign[k]))
            for k in range(len(zs)):
                lo, hi = max(k - 1, 0), min(k + 1, len(zs) - 1)
                if smin[k] <= smin[lo] and smin[k] <= smin[hi]:
                    res = minimize_scalar(
                        lambda z: self._probe(z)[1],
                        bounds=(zs[lo], zs[hi]),
                        method="bounded",
                        options={"xatol": ROOT_TOL},
                    )
                    cands.append(float(res.x))
        # candidates of one root from the sign and minimum searches land close together
        groups: list[list[float]] = []
        for z in sorted(cands):
            if groups and z - groups[-1][-1] <= MERGE_GAP:
                groups[-1].append(z)
            else:
                groups.append([z])
        roots = []
        for g in groups:
            scored = [(self._probe(z)[1], z) for z in g]
            smin, z = min(scored)
            if smin <= ACCEPT_TOL:
                roots.append(z)
        return [self.bundle(z) for z in roots]

    def _bisect_sign(self, a: float, b: float, sa: float) -> float:
        while b - a > ROOT_TOL:
            m = 0.5 * (a + b)
            if m <= a or m >= b:
                break
            if self._probe(m)[0] == sa:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    def bundle(self, z: float) -> EigvecBundle:
        T = self.reduced_system(z, "derived", check=False).T
        IT = np.eye(T.shape[0]) - T
        _, s, vh = sla.svd(IT)
        null = s <= max(ACCEPT_TOL, 1e3 * s[-1])
        psi = vh[-1]
        full = self.reconstruct(psi, z)
        return EigvecBundle(
            z=float(z),
            psi=psi,
            full=full,
            residual=self.residual(full, z),
            multiplicity=int(null.sum()),
            distance=float(np.min(np.abs(1.0 - np.linalg.eigvals(T)))),
        )

    # -- reconstruction --------------------------------------------------------------

    def reconstruct(self, psi, z: float):
        """Full nodal eigenvector ``(f0, f1, f2, f3)`` from a reduced solution."""
        P, N = self.problem, self.N
        psi = np.asarray(psi, dtype=float)
        f0, f1 = psi[:1], psi[1 : 1 + N]
        c1, c2 = psi[1 + N : 1 + 2 * N], psi[1 + 2 * N :]
        d3 = self.det.delta3_all(z)
        den = P.w3 - z
        if np.min(np.abs(d3)) < SINGULAR_TOL or np.min(np.abs(den)) < SINGULAR_TOL:
            raise DomainError(f"division guard tripped at z={z!r}")
        num = -P.v2[None, :] * f1[:, None] + P.v21[:, None] * c1[None, :] + P.v22[None, :] * c2[:, None]
        f2 = num / d3
        f3 = -P.v3[None, None, :] * f2[:, :, None] / den
        return f0, f1, f2, f3

    def recompute_c(self, f2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        wt = self.problem.weight
        return wt * self.problem.v21 @ f2, wt * f2 @ self.problem.v22

    def scaled(self, full) -> np.ndarray:
        wt = self.problem.weight
        f0, f1, f2, f3 = full
        return np.concatenate([f0, np.sqrt(wt) * f1, wt * f2.ravel(), wt**1.5 * f3.ravel()])

    def residual(self, full, z: float) -> float:
        x = self.scaled(full)
        H = self.full_operator.entries
        return float(np.linalg.norm(H @ x - z * x) / np.linalg.norm(x))
