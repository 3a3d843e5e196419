"""Fiber bands, fiber bound states and the branch structure of the essential spectrum.

Sets over the continuum of quasi-momenta are replaced by their samples on the
grid and merged into a :class:`~fockband.bandset.BandSet`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .bandset import MERGE_TOL, BandSet
from .determinant import BAND_GUARD, DeterminantEvaluator
from .model import ModelProblem

__all__ = ["BranchDecomposition", "ChannelAnalysis"]

ROOT_TOL = 1e-12
SCAN_POINTS = 400
BRACKET_CAP = 1e6


@dataclass(frozen=True)
class BranchDecomposition:
    """Two-, three- and four-particle branches of the essential spectrum."""

    four: BandSet
    three: BandSet
    two1: BandSet
    two2: BandSet

    @property
    def two(self) -> BandSet:
        return self.two1.union(self.two2)

    def to_json(self) -> dict:
        return {k: getattr(self, k).to_json() for k in ("four", "three", "two1", "two2")}


class ChannelAnalysis:
    """Band structure of the channel operators for one problem.

    Results are cached on the instance; the problem is immutable, so an
    instance may be shared freely.

    `closure` controls how root sets sampled over the grid become closed
    sets: ``"points"`` keeps the samples (merged within `merge_tol`),
    ``"connect"`` (default) also joins samples of the same continuous branch
    at neighbouring grid nodes.
    """

    def __init__(
        self,
        problem: ModelProblem,
        evaluator: DeterminantEvaluator | None = None,
        merge_tol: float = MERGE_TOL,
        root_tol: float = ROOT_TOL,
        scan_points: int = SCAN_POINTS,
        closure: str = "connect",
    ):
        self.problem = problem
        self.det = evaluator if evaluator is not None else DeterminantEvaluator(problem)
        self.det._channel = self
        self.merge_tol = merge_tol
        self.root_tol = root_tol
        self.scan_points = scan_points
        if closure not in ("connect", "points"):
            raise ValueError(f"closure must be 'connect' or 'points', got {closure!r}")
        self.closure = closure
        self.bound = problem.spectral_bound() + 1.0
        self._fiber_cache = {}
        self._disc12_cache = {}

    # -- three-particle fibers -------------------------------------------------

    def band3(self, p: int, q: int) -> tuple[float, float]:
        return float(self.det.m3[p, q]), float(self.det.M3[p, q])

    @cached_property
    def disc3_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Roots of ``delta3`` below and above each fiber band, ``nan`` if absent.

        Both arrays have shape ``(N, N)`` indexed by ``(p, q)``.
        """
        N = self.problem.N
        w2 = self.problem.w2.ravel()
        w3 = self.problem.w3.reshape(N * N, N)
        vw = self.det.vw3
        m3 = self.det.m3.ravel()
        M3 = self.det.M3.ravel()
        cap = BRACKET_CAP * max(1.0, self.problem.spectral_bound())
        f = lambda idx, z: kernels.delta3_many(w2[idx], w3[idx], vw, z)

        left = np.full(N * N, np.nan)
        idx = np.arange(N * N)
        hi = m3 - BAND_GUARD
        has = f(idx, hi) < 0.0
        idx = idx[has]
        width = np.ones(idx.size)
        while idx.size:
            pos = f(idx, m3[idx] - width) > 0.0
            grow = ~pos & (width < cap)
            if not grow.any():
                break
            width[grow] *= 2.0
        if idx.size:
            ok = f(idx, m3[idx] - width) > 0.0
            idx, width = idx[ok], width[ok]
            left[idx] = kernels.bisect_delta3(
                w2[idx], w3[idx], vw, m3[idx] - width, m3[idx] - BAND_GUARD, self.root_tol
            )

        right = np.full(N * N, np.nan)
        idx = np.arange(N * N)
        lo = M3 + BAND_GUARD
        has = f(idx, lo) > 0.0
        idx = idx[has]
        width = np.ones(idx.size)
        while idx.size:
            neg = f(idx, M3[idx] + width) <= 0.0
            grow = ~neg & (width < cap)
            if not grow.any():
                break
            width[grow] *= 2.0
        if idx.size:
            ok = f(idx, M3[idx] + width) <= 0.0
            idx, width = idx[ok], width[ok]
            right[idx] = kernels.bisect_delta3(
                w2[idx], w3[idx], vw, M3[idx] + BAND_GUARD, M3[idx] + width, self.root_tol
            )
        return left.reshape(N, N), right.reshape(N, N)

    def disc3(self, p: int, q: int) -> list[float]:
        """Discrete eigenvalues of the fiber ``h3(p, q)``, ascending."""
        left, right = self.disc3_table
        return [float(x) for x in (left[p, q], right[p, q]) if np.isfinite(x)]

    def ess_fiber12(self, p: int, transpose: bool = False) -> BandSet:
        """Closure of the union over ``q`` of the spectra of ``h3(p, q)``.

        With ``transpose=True`` the union runs over ``h3(q, p)`` instead.
        """
        key = (int(p), bool(transpose))
        if key not in self._fiber_cache:
            self._fiber_cache[key] = self._ess_fiber12(*key)
        return self._fiber_cache[key]

    def _ess_fiber12(self, p, transpose):
        left, right = self.disc3_table
        sl = (slice(None), p) if transpose else (p, slice(None))
        lo, hi = self.det.m3[sl], self.det.M3[sl]
        pts = np.concatenate([left[sl], right[sl]])
        return BandSet.build(zip(lo, hi), pts[np.isfinite(pts)], self.merge_tol)

    # -- two-particle fibers ------------------------------------------------------

    def _intervals(self, p: int) -> list[tuple[float, float]]:
        bands = self.ess_fiber12(p)
        return bands.complement(-self.bound, self.bound, guard=BAND_GUARD)

    def _bisect(self, fn, a: np.ndarray, b: np.ndarray, fa: np.ndarray) -> np.ndarray:
        a, b, fa = a.copy(), b.copy(), fa.copy()
        for _ in range(200):
            if np.all(b - a <= self.root_tol):
                break
            mid = 0.5 * (a + b)
            fm = fn(mid)
            same = np.sign(fm) == np.sign(fa)
            a = np.where(same, mid, a)
            fa = np.where(same, fm, fa)
            b = np.where(same, b, mid)
        return 0.5 * (a + b)

    def disc12(self, p: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Roots of ``delta1(p; .)`` and ``delta2(p; .)`` off ``sigma_ess(h1(p))``."""
        p = int(p)
        if p not in self._disc12_cache:
            self._disc12_cache[p] = self._disc12(p)
        return self._disc12_cache[p]

    def _disc12(self, p):
        ivs = self._intervals(p)
        if not ivs:
            return (), ()
        a = np.array([iv[0] for iv in ivs])
        b = np.array([iv[1] for iv in ivs])

        d1 = lambda z: self.det.delta1_many(p, z)
        fa, fb = d1(a), d1(b)
        sel = (fa > 0) & (fb < 0)
        roots1 = self._bisect(d1, a[sel], b[sel], fa[sel]) if sel.any() else np.empty(0)
        roots1 = np.concatenate([roots1, a[fa == 0], b[fb == 0]])

        d2 = lambda z: self.det.delta2_many(p, z)
        t = np.linspace(0.0, 1.0, self.scan_points)
        grid = a[:, None] + (b - a)[:, None] * t[None, :]
        vals = d2(grid.ravel()).reshape(grid.shape)
        exact = grid[vals == 0.0]
        s = np.sign(vals)
        k = np.nonzero(s[:, :-1] * s[:, 1:] < 0)
        lo, hi = grid[:, :-1][k], grid[:, 1:][k]
        roots2 = self._bisect(d2, lo, hi, vals[:, :-1][k]) if lo.size else np.empty(0)
        roots2 = np.concatenate([roots2, exact])
        return tuple(sorted(map(float, roots1))), tuple(sorted(map(float, roots2)))

    # -- channel spectra ------------------------------------------------------------

    def _neighbour_pairs(self, arity: int) -> list[tuple[np.ndarray, np.ndarray]]:
        """Flat index pairs of grid neighbours on ``(T^nu)^arity`` (periodic)."""
        n, nu = self.problem.grid.n, self.problem.grid.nu
        shape = (n,) * (nu * arity)
        idx = np.arange(n ** (nu * arity)).reshape(shape)
        return [(idx.ravel(), np.roll(idx, -1, axis=ax).ravel()) for ax in range(len(shape))]

    def _connect(self, values: np.ndarray, arity: int) -> tuple[list, np.ndarray]:
        """Intervals spanned by one continuous root branch sampled on the grid.

        `values` holds one root per grid node (``nan`` where the branch does
        not exist).  Neighbouring samples of the same branch are joined; the
        intermediate value theorem puts the whole segment in the closure.
        """
        flat = values.ravel()
        ivs = []
        linked = np.zeros(flat.size, dtype=bool)
        for a, b in self._neighbour_pairs(arity):
            ok = np.isfinite(flat[a]) & np.isfinite(flat[b])
            lo = np.minimum(flat[a][ok], flat[b][ok])
            hi = np.maximum(flat[a][ok], flat[b][ok])
            ivs.extend(zip(lo, hi))
            linked[a[ok]] = True
            linked[b[ok]] = True
        lone = flat[np.isfinite(flat) & ~linked]
        return ivs, lone

    def _branch_set(self, tables: list[np.ndarray], arity: int, loose=()) -> BandSet:
        ivs, pts = [], list(loose)
        for t in tables:
            if self.closure == "connect":
                i, lone = self._connect(t, arity)
                ivs.extend(i)
                pts.extend(lone)
            else:
                pts.extend(t[np.isfinite(t)])
        return BandSet.build(ivs, pts, self.merge_tol)

    def _disc12_tables(self, which: int) -> tuple[list[np.ndarray], list[float]]:
        """Roots of one two-particle determinant arranged into continuous branches.

        Below the fiber band the k-th lowest root is the k-th lowest discrete
        eigenvalue and therefore continuous in ``p``; likewise from the top.
        Roots inside gaps of the fiber band are kept as loose points.
        """
        N = self.problem.N
        below, above, loose = [], [], []
        for p in range(N):
            roots = np.asarray(self.disc12(p)[which - 1])
            bands = self.ess_fiber12(p)
            lo, hi = (bands.min, bands.max) if not bands.is_empty else (np.inf, -np.inf)
            below.append(np.sort(roots[roots < lo]))
            above.append(np.sort(roots[roots > hi])[::-1])
            loose.extend(roots[(roots >= lo) & (roots <= hi)])
        tables = []
        for group in (below, above):
            depth = max((g.size for g in group), default=0)
            for k in range(depth):
                tables.append(np.array([g[k] if g.size > k else np.nan for g in group]))
        return tables, loose

    @cached_property
    def branches(self) -> BranchDecomposition:
        w3 = self.problem.w3
        four = BandSet.interval(float(w3.min()), float(w3.max()), self.merge_tol)
        three = self._branch_set(list(self.disc3_table), 2)
        two1 = self._branch_set(*self._disc12_tables(1)[:1], 1, self._disc12_tables(1)[1])
        two2 = self._branch_set(*self._disc12_tables(2)[:1], 1, self._disc12_tables(2)[1])
        return BranchDecomposition(four, three, two1, two2)

    def channel_spectrum(self, which: int) -> BandSet:
        br = self.branches
        if which == 1:
            return br.two1.union(br.three, br.four)
        if which == 2:
            return br.two2.union(br.three, br.four)
        if which == 3:
            return br.three.union(br.four)
        raise ValueError(f"channel index must be 1, 2 or 3, got {which!r}")

    def essential_spectrum(self) -> tuple[BandSet, BranchDecomposition]:
        ess = self.channel_spectrum(1).union(self.channel_spectrum(2), self.channel_spectrum(3))
        return ess, self.branches

    def hwz_min(self) -> float:
        return min(self.channel_spectrum(1).min, self.channel_spectrum(2).min)

    def degenerate_fibers(self, tol: float = 1e-12) -> list[tuple[int, int, float]]:
        """Nodes ``(p, q)`` whose fiber band has collapsed to a point."""
        width = self.det.M3 - self.det.m3
        ps, qs = np.nonzero(width <= tol)
        return [(int(p), int(q), float(self.det.m3[p, q])) for p, q in zip(ps, qs)]
