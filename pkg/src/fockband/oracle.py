"""Dense discretizations of the operator, its channel operators and fibers.

Sector ``k`` (``k`` particles) is represented by nodal values scaled by
``weight**(k/2)``.  In that basis every quadrature-discretized integral
operator becomes an exactly symmetric matrix, so the assembled operators are
real symmetric bit-for-bit and can go straight to a dense symmetric solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .bandset import BandSet
from .model import ModelProblem

__all__ = [
    "SizeError",
    "SectorLayout",
    "DenseSymOperator",
    "Blocks",
    "assemble_full",
    "assemble_channel",
    "assemble_fiber",
    "eig_sym",
    "classify_spectrum",
]

DIM_CAP = 20000


class SizeError(ValueError):
    """Requested discretization exceeds the dense dimension cap."""


@dataclass(frozen=True)
class SectorLayout:
    """Sector labels and sizes of a block vector."""

    sectors: tuple[int, ...]
    sizes: tuple[int, ...]

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.sizes)[:-1]]))

    @property
    def dim(self) -> int:
        return int(sum(self.sizes))

    def slice(self, sector: int) -> slice:
        i = self.sectors.index(sector)
        off = self.offsets[i]
        return slice(off, off + self.sizes[i])

    def multi_index(self, sector: int, flat: int, N: int) -> tuple[int, ...]:
        """Grid multi-index ``(p, q, t)[:k]`` of a flat position inside `sector`."""
        i = self.sectors.index(sector)
        local = flat - self.offsets[i]
        if sector == 0 or sector not in (1, 2, 3):
            return ()
        return tuple(int(x) for x in np.unravel_index(local, (N,) * sector))


@dataclass(frozen=True, eq=False)
class DenseSymOperator:
    entries: np.ndarray
    layout: SectorLayout

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def block(self, si: int, sj: int) -> np.ndarray:
        return self.entries[self.layout.slice(si), self.layout.slice(sj)]


class Blocks:
    """Scaled component blocks of the full operator.

    Off-diagonal blocks are stored once (upper position); the assembler writes
    their exact transposes into the lower position.
    """

    def __init__(self, problem: ModelProblem):
        self.problem = problem
        self.N = problem.N
        self.wt = problem.weight
        self.sw = np.sqrt(problem.weight)

    @cached_property
    def H01(self) -> np.ndarray:
        return (self.sw * self.problem.v1)[None, :]

    @cached_property
    def H12(self) -> np.ndarray:
        return np.kron(np.eye(self.N), (self.sw * self.problem.v2)[None, :])

    @cached_property
    def H23(self) -> np.ndarray:
        return np.kron(np.eye(self.N * self.N), (self.sw * self.problem.v3)[None, :])

    @cached_property
    def V21(self) -> np.ndarray:
        v = self.problem.v21
        return np.kron(self.wt * np.outer(v, v), np.eye(self.N))

    @cached_property
    def V22(self) -> np.ndarray:
        v = self.problem.v22
        return np.kron(np.eye(self.N), self.wt * np.outer(v, v))

    @property
    def d0(self) -> np.ndarray:
        return np.array([self.problem.w0])

    @property
    def d1(self) -> np.ndarray:
        return self.problem.w1

    @property
    def d2(self) -> np.ndarray:
        return self.problem.w2.ravel()

    @property
    def d3(self) -> np.ndarray:
        return self.problem.w3.ravel()


def _sizes(problem: ModelProblem, sectors) -> tuple[int, ...]:
    return tuple(problem.N**k for k in sectors)


def _build(layout: SectorLayout, diag: dict, dense: dict, upper: dict) -> DenseSymOperator:
    if layout.dim > DIM_CAP:
        raise SizeError(f"dimension {layout.dim} exceeds cap {DIM_CAP}")
    H = np.zeros((layout.dim, layout.dim))
    for s, d in diag.items():
        sl = layout.slice(s)
        H[sl, sl] += np.diag(d)
    for s, m in dense.items():
        sl = layout.slice(s)
        H[sl, sl] -= m
    for (si, sj), m in upper.items():
        a, b = layout.slice(si), layout.slice(sj)
        H[a, b] = m
        H[b, a] = m.T
    return DenseSymOperator(H, layout)


def assemble_full(problem: ModelProblem) -> DenseSymOperator:
    """Discretization of the full four-sector operator."""
    layout = SectorLayout((0, 1, 2, 3), _sizes(problem, (0, 1, 2, 3)))
    if layout.dim > DIM_CAP:
        raise SizeError(f"dimension {layout.dim} exceeds cap {DIM_CAP}")
    B = Blocks(problem)
    return _build(
        layout,
        {0: B.d0, 1: B.d1, 2: B.d2, 3: B.d3},
        {2: B.V21 + B.V22},
        {(0, 1): B.H01, (1, 2): B.H12, (2, 3): B.H23},
    )


def assemble_channel(which: int, problem: ModelProblem) -> DenseSymOperator:
    """Channel operator ``H1``, ``H2`` or ``H3``."""
    if which not in (1, 2, 3):
        raise ValueError(f"channel index must be 1, 2 or 3, got {which!r}")
    sectors = (1, 2, 3) if which == 2 else (2, 3)
    layout = SectorLayout(sectors, _sizes(problem, sectors))
    if layout.dim > DIM_CAP:
        raise SizeError(f"dimension {layout.dim} exceeds cap {DIM_CAP}")
    B = Blocks(problem)
    if which == 2:
        return _build(layout, {1: B.d1, 2: B.d2, 3: B.d3}, {2: B.V22}, {(1, 2): B.H12, (2, 3): B.H23})
    dense = {2: B.V21} if which == 1 else {}
    return _build(layout, {2: B.d2, 3: B.d3}, dense, {(2, 3): B.H23})


def assemble_fiber(kind: str, problem: ModelProblem, p: int, q: int | None = None) -> DenseSymOperator:
    """Fiber operators ``h3(p, q)``, ``h1(p)`` and ``h2(p)``.

    ``h3(p, q)`` acts on sectors ``(0, 1)``, ``h1(p)`` on ``(1, 2)`` and
    ``h2(p)`` on ``(0, 1, 2)``; sector labels are local to the fiber.
    """
    N, wt, sw = problem.N, problem.weight, np.sqrt(problem.weight)
    v3row = (sw * problem.v3)[None, :]
    if kind == "h3":
        if q is None:
            raise ValueError("h3 fiber needs both p and q")
        layout = SectorLayout((0, 1), (1, N))
        return _build(
            layout, {0: problem.w2[p, q : q + 1], 1: problem.w3[p, q]}, {}, {(0, 1): v3row}
        )
    cont = {1: problem.w2[p], 2: problem.w3[p].ravel()}
    coupling = {(1, 2): np.kron(np.eye(N), v3row)}
    if kind == "h1":
        layout = SectorLayout((1, 2), (N, N * N))
        v = problem.v21
        return _build(layout, cont, {1: wt * np.outer(v, v)}, coupling)
    if kind == "h2":
        layout = SectorLayout((0, 1, 2), (1, N, N * N))
        v = problem.v22
        coupling[(0, 1)] = (sw * problem.v2)[None, :]
        return _build(layout, {0: problem.w1[p : p + 1], **cont}, {1: wt * np.outer(v, v)}, coupling)
    raise ValueError(f"unknown fiber kind {kind!r}")


def eig_sym(op, vectors: bool = False):
    """All eigenvalues (ascending) of a symmetric operator, optionally with vectors."""
    a = op.entries if isinstance(op, DenseSymOperator) else np.asarray(op, dtype=float)
    if vectors:
        return sla.eigh(a, check_finite=True)
    return sla.eigh(a, eigvals_only=True, check_finite=True)


def cluster_tol(n_eigs: int, predicted: BandSet) -> float:
    """Twice the mean level spacing the predicted bands would carry."""
    if n_eigs == 0:
        return 1e-6
    return max(1e-6, 2.0 * predicted.measure / n_eigs)


def classify_spectrum(eigs, predicted: BandSet, tol: float | None = None):
    """Split eigenvalues into those near the predicted set and isolated ones.

    Returns ``(isolated, clustered, report)``; the report carries the
    tolerance used and the Hausdorff distance between the clustered
    eigenvalues and the predicted set.
    """
    eigs = np.sort(np.asarray(eigs, dtype=float))
    if tol is None:
        tol = cluster_tol(eigs.size, predicted)
    d = np.asarray(predicted.distance(eigs)) if eigs.size else np.empty(0)
    near = d <= tol
    clustered, isolated = eigs[near], eigs[~near]
    report = {
        "tol": float(tol),
        "n_clustered": int(clustered.size),
        "n_isolated": int(isolated.size),
        "hausdorff": float(predicted.hausdorff(clustered)) if clustered.size else float("inf"),
    }
    return isolated, clustered, report
