"""Two-by-two block split of the operator and its transfer function.

With ``A`` on sectors ``{0, 1}``, ``C`` on sectors ``{2, 3}`` and ``B`` the
coupling between them,

    L(lam) = A - lam - B (C - lam)^-1 B^T

is singular exactly when ``lam`` (off the spectrum of ``C``) is an eigenvalue
of the whole operator.  ``L`` is strictly decreasing in ``lam``, which gives a
Rayleigh functional, an index ``kappa`` and a min-max principle above the top
of ``C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .bandset import BandSet
from .determinant import DomainError
from .model import ModelProblem
from .oracle import DenseSymOperator, SectorLayout, assemble_full, classify_spectrum

__all__ = [
    "GapError",
    "PencilSplit",
    "RayleighResult",
    "split_blocks",
    "eval_L",
    "L_derivative",
    "phi",
    "rayleigh",
    "kappa_alpha",
    "pencil_spectrum",
    "oracle_pairs",
    "schur_residuals",
    "minmax_verify",
    "gap_shift",
    "check_gap",
]

RESOLVENT_GUARD = 1e-10
EDGE_GUARD = 1e-8
ROOT_TOL = 1e-12
SCAN_POINTS = 200
GAP_MARGIN = 2.0
MINMAX_TOL = 1e-8


class GapError(DomainError):
    """The top of ``C`` does not lie below the essential part of ``A``."""


@dataclass(frozen=True, eq=False)
class PencilSplit:
    blockA: DenseSymOperator
    blockC: DenseSymOperator
    blockB: np.ndarray
    full: DenseSymOperator

    @cached_property
    def eigC(self) -> tuple[np.ndarray, np.ndarray]:
        return sla.eigh(self.blockC.entries)

    @cached_property
    def eigA(self) -> np.ndarray:
        return sla.eigh(self.blockA.entries, eigvals_only=True)

    @cached_property
    def eigH(self) -> np.ndarray:
        return sla.eigh(self.full.entries, eigvals_only=True)

    @property
    def b_C(self) -> float:
        return float(self.eigC[0][-1])

    @cached_property
    def a_ess_A(self) -> float:
        """Lowest eigenvalue of ``A`` that clusters on the range of the sector-1 diagonal."""
        d1 = np.diag(self.blockA.block(1, 1))
        _, clustered, _ = classify_spectrum(self.eigA, BandSet.interval(d1.min(), d1.max()))
        return float(clustered.min())

    @property
    def a_H(self) -> float:
        return float(self.eigH[0])

    @property
    def b_H(self) -> float:
        return float(self.eigH[-1])

    @property
    def gap(self) -> tuple[float, float]:
        return self.b_C, self.a_ess_A

    @cached_property
    def _G(self) -> np.ndarray:
        # B in the eigenbasis of C
        return self.blockB @ self.eigC[1]

    def reassemble(self) -> np.ndarray:
        B = self.blockB
        return np.block([[self.blockA.entries, B], [B.T, self.blockC.entries]])


@dataclass(frozen=True)
class RayleighResult:
    value: float
    iterations: int = 0

    @property
    def kind(self) -> str:
        if np.isposinf(self.value):
            return "+inf"
        if np.isneginf(self.value):
            return "-inf"
        return "root"

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.value))


def split_blocks(full: DenseSymOperator) -> PencilSplit:
    """Slices an assembled full operator into ``A``, ``B`` and ``C``."""
    lay = full.layout
    if lay.sectors != (0, 1, 2, 3):
        raise ValueError(f"expected a four-sector operator, got sectors {lay.sectors}")
    na = lay.sizes[0] + lay.sizes[1]
    H = full.entries
    A = DenseSymOperator(H[:na, :na].copy(), SectorLayout((0, 1), lay.sizes[:2]))
    C = DenseSymOperator(H[na:, na:].copy(), SectorLayout((2, 3), lay.sizes[2:]))
    return PencilSplit(A, C, H[:na, na:].copy(), full)


def _check_lambda(split: PencilSplit, lam: float):
    d = float(np.min(np.abs(split.eigC[0] - lam)))
    if d <= RESOLVENT_GUARD:
        raise DomainError(f"lambda={lam!r} is within {d:.2e} of the spectrum of C")


def _resolvent_BT(split: PencilSplit, lam: float) -> np.ndarray:
    C = split.blockC.entries
    nc = C.shape[0]
    return sla.solve(C - lam * np.eye(nc), split.blockB.T, assume_a="sym")


def eval_L(split: PencilSplit, lam: float) -> DenseSymOperator:
    """Transfer function ``L(lam)``, with the resolvent applied by a dense solve."""
    lam = float(lam)
    _check_lambda(split, lam)
    A = split.blockA.entries
    L = A - lam * np.eye(A.shape[0]) - split.blockB @ _resolvent_BT(split, lam)
    return DenseSymOperator(0.5 * (L + L.T), split.blockA.layout)


def L_derivative(split: PencilSplit, lam: float) -> np.ndarray:
    """``dL/dlam = -I - B (C - lam)^-2 B^T``."""
    _check_lambda(split, lam)
    Y = _resolvent_BT(split, lam)
    return -np.eye(Y.shape[1]) - Y.T @ Y


def _phi_parts(split: PencilSplit, x: np.ndarray):
    g = split._G.T @ x
    return float(x @ split.blockA.entries @ x), float(x @ x), g * g


def phi(split: PencilSplit, x, lam) -> np.ndarray | float:
    """``(L(lam) x, x)``; vectorised over `lam`."""
    x = np.asarray(x, dtype=float)
    ax, xx, g2 = _phi_parts(split, x)
    lam = np.asarray(lam, dtype=float)
    c = split.eigC[0]
    out = ax - lam * xx - np.sum(g2 / (c - lam[..., None]), axis=-1)
    return out if out.ndim else float(out)


def rayleigh(split: PencilSplit, x, interval: tuple[float, float]) -> RayleighResult:
    """Root of ``phi(x, .)`` in ``[alpha, beta]``, or ``+inf`` / ``-inf``.

    ``phi`` is strictly decreasing, so at most one root exists; if ``phi`` keeps
    one sign on the whole interval the extended value records on which side
    the root would lie.
    """
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise ValueError("rayleigh expects a unit vector")
    a, b = map(float, interval)
    if a < split.b_C + EDGE_GUARD:
        raise DomainError(f"interval start {a!r} is not above the top of C ({split.b_C!r})")
    _check_lambda(split, a)
    _check_lambda(split, b)
    ax, xx, g2 = _phi_parts(split, x)
    c = split.eigC[0]

    def f(lam):
        return ax - lam * xx - float(np.sum(g2 / (c - lam)))

    fa, fb = f(a), f(b)
    if fa > 0 and fb > 0:
        return RayleighResult(np.inf)
    if fa < 0 and fb < 0:
        return RayleighResult(-np.inf)
    if fa == 0:
        return RayleighResult(a)
    if fb == 0:
        return RayleighResult(b)
    it = 0
    while b - a > ROOT_TOL:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        it += 1
        if f(m) > 0:
            a = m
        else:
            b = m
    return RayleighResult(0.5 * (a + b), it)


def kappa_alpha(split: PencilSplit, alpha: float) -> int:
    """Negative inertia of ``L(alpha)``."""
    return int(np.sum(sla.eigh(eval_L(split, alpha).entries, eigvals_only=True) < 0))


def pencil_spectrum(split: PencilSplit, interval: tuple[float, float], scan_points: int = SCAN_POINTS) -> list[float]:
    """Points of the interval where ``L`` is singular, with multiplicity.

    ``L`` is decreasing, so its negative inertia only grows with ``lam`` and
    each unit jump marks one eigenvalue; jumps are isolated by bisection.
    """
    a, b = map(float, interval)
    lams = np.linspace(a, b, scan_points)
    ks = [kappa_alpha(split, lam) for lam in lams]
    roots: list[float] = []

    def locate(lo, hi, klo, khi):
        if khi <= klo:
            return
        if hi - lo <= ROOT_TOL:
            roots.extend([0.5 * (lo + hi)] * (khi - klo))
            return
        mid = 0.5 * (lo + hi)
        try:
            kmid = kappa_alpha(split, mid)
        except DomainError:
            # pole of the resolvent; only reachable when the interval meets sigma(C)
            kmid = klo
        locate(lo, mid, klo, kmid)
        locate(mid, hi, kmid, khi)

    for i in range(scan_points - 1):
        locate(lams[i], lams[i + 1], ks[i], ks[i + 1])
    return roots


def oracle_pairs(split: PencilSplit, interval: tuple[float, float]):
    """Eigenpairs of the full operator strictly inside `interval`."""
    a, b = map(float, interval)
    w, V = sla.eigh(split.full.entries)
    keep = (w > a) & (w < b)
    return w[keep], V[:, keep]


def schur_residuals(split: PencilSplit, lam: float, vec: np.ndarray) -> tuple[float, float]:
    """``||L(lam) x||`` and ``||y + (C - lam)^-1 B^T x||`` for an eigenvector ``(x, y)``."""
    na = split.blockA.dim
    vec = vec / np.linalg.norm(vec)
    x, y = vec[:na], vec[na:]
    rL = float(np.linalg.norm(eval_L(split, lam).entries @ x))
    ry = float(np.linalg.norm(y + _resolvent_BT(split, lam) @ x))
    return rL, ry


def minmax_verify(
    split: PencilSplit,
    interval: tuple[float, float],
    n_random: int = 100,
    seed: int = 0,
    tol: float = MINMAX_TOL,
) -> dict:
    """Attainment checks of the min-max principle on the oracle eigenpairs.

    For every eigenvalue ``lam_i`` of the full operator in `interval`, with
    top blocks ``x_1..x_i``: ``p(x_i) = lam_i`` and ``p(x) <= lam_i`` for
    random unit ``x`` in their span.
    """
    rng = np.random.default_rng(seed)
    lams, vecs = oracle_pairs(split, interval)
    na = split.blockA.dim
    X = vecs[:na]
    X = X / np.linalg.norm(X, axis=0)
    items = []
    for i, lam in enumerate(lams):
        p = rayleigh(split, X[:, i], interval)
        Q, _ = np.linalg.qr(X[:, : i + 1])
        worst = -np.inf
        for _ in range(n_random):
            c = rng.standard_normal(i + 1)
            x = Q @ (c / np.linalg.norm(c))
            x /= np.linalg.norm(x)
            worst = max(worst, rayleigh(split, x, interval).value)
        items.append(
            {
                "i": i + 1,
                "lambda": float(lam),
                "p": float(p.value),
                "attained": bool(p.is_finite and abs(p.value - lam) <= tol),
                "span_max": float(worst),
                "bounded": bool(worst <= lam + tol),
            }
        )
    return {
        "interval": [float(interval[0]), float(interval[1])],
        "kappa_alpha": kappa_alpha(split, interval[0]),
        "items": items,
        "ok": all(it["attained"] and it["bounded"] for it in items),
    }


def check_gap(split: PencilSplit) -> tuple[float, float]:
    """Returns ``(b(C), a_ess(A))`` after checking that the gap is non-empty."""
    bC, aA = split.gap
    if not bC < aA:
        raise GapError(f"top of C {bC!r} is not below the essential bottom of A {aA!r}")
    return bC, aA


def gap_shift(base: ModelProblem, margin: float = GAP_MARGIN) -> tuple[float, float]:
    """Constant lift of ``w1`` and the matching ``w0`` for the gap preset.

    ``w0`` is placed at the top of the lifted ``w1`` band, so lifting by ``s``
    moves the whole ``A`` block by ``s``.  The lift is then the single value
    that puts the essential bottom of ``A`` exactly `margin` above the top of
    ``C``, which does not depend on ``w1`` or ``w0``.
    """
    top = float(base.w1.max())
    split = split_blocks(assemble_full(base.with_w0(top)))
    shift = split.b_C + margin - split.a_ess_A
    return float(shift), top + float(shift)
