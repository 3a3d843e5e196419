"""Finite unions of closed intervals and isolated points on the real line."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = ["BandSet"]

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class BandSet:
    """Sorted, disjoint closed intervals plus isolated points.

    Construct through :meth:`build`, which normalises arbitrary input: intervals
    whose gap is at most `merge_tol` are merged, points within `merge_tol` of an
    interval are absorbed and points within `merge_tol` of each other are
    collapsed to their mean.
    """

    intervals: tuple[tuple[float, float], ...] = ()
    points: tuple[float, ...] = ()
    merge_tol: float = field(default=MERGE_TOL, compare=False)

    @classmethod
    def build(cls, intervals: Iterable = (), points: Iterable = (), merge_tol: float = MERGE_TOL) -> "BandSet":
        ivs = sorted((float(min(a, b)), float(max(a, b))) for a, b in intervals)
        merged: list[list[float]] = []
        for lo, hi in ivs:
            if merged and lo - merged[-1][1] <= merge_tol:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        pts = np.sort(np.asarray(list(points), dtype=float).ravel())
        if merged and pts.size:
            lo = np.array([m[0] for m in merged])
            hi = np.array([m[1] for m in merged])
            k = np.searchsorted(lo, pts, side="right") - 1
            d = np.full(pts.shape, np.inf)
            ok = k >= 0
            d[ok] = np.maximum(pts[ok] - hi[k[ok]], 0.0)
            nxt = k + 1
            ok2 = nxt < lo.size
            d[ok2] = np.minimum(d[ok2], np.maximum(lo[nxt[ok2]] - pts[ok2], 0.0))
            pts = pts[d > merge_tol]
        collapsed: list[list[float]] = []
        for x in pts:
            if collapsed and x - collapsed[-1][-1] <= merge_tol:
                collapsed[-1].append(float(x))
            else:
                collapsed.append([float(x)])
        return cls(
            tuple((lo, hi) for lo, hi in merged),
            tuple(float(np.mean(c)) for c in collapsed),
            merge_tol,
        )

    @classmethod
    def interval(cls, lo: float, hi: float, merge_tol: float = MERGE_TOL) -> "BandSet":
        return cls.build([(lo, hi)], (), merge_tol)

    # -- algebra -----------------------------------------------------------

    def union(self, *others: "BandSet") -> "BandSet":
        ivs = list(self.intervals)
        pts = list(self.points)
        for o in others:
            ivs.extend(o.intervals)
            pts.extend(o.points)
        return BandSet.build(ivs, pts, self.merge_tol)

    __or__ = union

    @property
    def is_empty(self) -> bool:
        return not self.intervals and not self.points

    @property
    def min(self) -> float:
        cands = [iv[0] for iv in self.intervals[:1]] + list(self.points[:1])
        if not cands:
            raise ValueError("empty BandSet has no minimum")
        return min(cands)

    @property
    def max(self) -> float:
        cands = [iv[1] for iv in self.intervals[-1:]] + list(self.points[-1:])
        if not cands:
            raise ValueError("empty BandSet has no maximum")
        return max(cands)

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def distance(self, x) -> np.ndarray | float:
        """Distance from each of `x` to the set (``inf`` for the empty set)."""
        x = np.asarray(x, dtype=float)
        d = np.full(x.shape, np.inf)
        for lo, hi in self.intervals:
            d = np.minimum(d, np.maximum(np.maximum(lo - x, x - hi), 0.0))
        if self.points:
            pts = np.asarray(self.points)
            k = np.searchsorted(pts, x)
            left = pts[np.clip(k - 1, 0, pts.size - 1)]
            right = pts[np.clip(k, 0, pts.size - 1)]
            d = np.minimum(d, np.minimum(np.abs(x - left), np.abs(x - right)))
        return d if d.ndim else float(d)

    def contains(self, x, margin: float = 0.0):
        return self.distance(x) <= margin

    def dilate(self, r: float) -> "BandSet":
        """Closed `r`-neighbourhood, returned as intervals only."""
        ivs = [(lo - r, hi + r) for lo, hi in self.intervals]
        ivs += [(p - r, p + r) for p in self.points]
        return BandSet.build(ivs, (), self.merge_tol)

    def complement(self, lo: float, hi: float, guard: float = 0.0) -> list[tuple[float, float]]:
        """Open intervals of ``(lo, hi)`` not covered by the set, shrunk by `guard`."""
        cuts = sorted([(a, b) for a, b in self.intervals] + [(p, p) for p in self.points])
        out = []
        cur = lo
        for a, b in cuts:
            if b < cur:
                continue
            if a > cur:
                out.append((cur, min(a, hi)))
            cur = max(cur, b)
            if cur >= hi:
                break
        if cur < hi:
            out.append((cur, hi))
        res = []
        for a, b in out:
            a2 = a if a == lo else a + guard
            b2 = b if b == hi else b - guard
            if b2 > a2:
                res.append((a2, b2))
        return res

    def hausdorff(self, values) -> float:
        """Hausdorff distance between the set and a finite set of reals."""
        values = np.sort(np.asarray(values, dtype=float).ravel())
        if self.is_empty and values.size == 0:
            return 0.0
        if self.is_empty or values.size == 0:
            return float("inf")
        forward = float(np.max(self.distance(values)))
        # the farthest point of an interval from a finite set is an endpoint
        # or a midpoint between consecutive values
        mids = 0.5 * (values[1:] + values[:-1])
        cands = list(self.points)
        for lo, hi in self.intervals:
            cands += [lo, hi]
            cands += list(mids[(mids > lo) & (mids < hi)])
        cands = np.asarray(cands)
        k = np.searchsorted(values, cands)
        left = np.abs(cands - values[np.clip(k - 1, 0, values.size - 1)])
        right = np.abs(values[np.clip(k, 0, values.size - 1)] - cands)
        backward = float(np.max(np.minimum(left, right)))
        return max(forward, backward)

    def hausdorff_set(self, other: "BandSet", samples: int = 64) -> float:
        """Hausdorff distance between two BandSets (intervals sampled densely)."""

        def cloud(s):
            out = list(s.points)
            for lo, hi in s.intervals:
                out += list(np.linspace(lo, hi, samples))
            return np.asarray(out)

        a, b = cloud(self), cloud(other)
        if a.size == 0 or b.size == 0:
            return 0.0 if a.size == b.size else float("inf")
        return max(float(np.max(other.distance(a))), float(np.max(self.distance(b))))

    def to_json(self) -> dict:
        return {"intervals": [list(iv) for iv in self.intervals], "points": list(self.points)}
