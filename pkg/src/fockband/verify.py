"""The acceptance checks, runnable from the command line or from pytest.

Each check returns a :class:`CheckResult`; a check passes only if every
tolerance holds *and* it finishes inside its time budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .bandset import BandSet
from .channel import ChannelAnalysis
from .determinant import DeterminantEvaluator
from .fy import FYSolver
from .model import FunctionSpec, make_problem, preset, quad_integrate, TorusGrid
from .oracle import (
    assemble_channel,
    assemble_fiber,
    assemble_full,
    classify_spectrum,
    eig_sym,
)
from .pencil import (
    check_gap,
    kappa_alpha,
    minmax_verify,
    oracle_pairs,
    pencil_spectrum,
    phi,
    schur_residuals,
    split_blocks,
)

__all__ = ["CheckResult", "CHECKS", "run_checks", "format_table"]

SEED = 20240601


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    runtime: float
    budget: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name:<28s} {self.runtime:8.2f}s / {self.budget:g}s"

    def to_json(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "runtime": self.runtime,
            "budget": self.budget,
            "detail": self.detail,
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


# -- shared fixtures -------------------------------------------------------------


@lru_cache(maxsize=None)
def _symmetric_study(n: int) -> dict:
    P = preset("symmetric", n=n)
    ch = ChannelAnalysis(P)
    ess = ch.essential_spectrum()[0]
    channels = {}
    for w in (1, 2, 3):
        ev = eig_sym(assemble_channel(w, P))
        pred = ch.channel_spectrum(w)
        channels[w] = {
            "forward": float(np.max(pred.distance(ev))),
            "delta": float(pred.hausdorff(ev)),
        }
    eigs = eig_sym(assemble_full(P))
    iso, cl, rep = classify_spectrum(eigs, ess)
    return {
        "channels": channels,
        "hausdorff": rep["hausdorff"],
        "hwz": ch.hwz_min(),
        "ess_min": ess.min,
        "clustered_min": float(cl.min()),
        "isolated": iso.tolist(),
    }


@lru_cache(maxsize=None)
def _gap_split(n: int = 8):
    P = preset("gap", n=n)
    split = split_blocks(assemble_full(P))
    bC, aA = check_gap(split)
    return split, (bC + 1e-6, aA - 1e-6)


def _admissible_z(fy: FYSolver, rng, k: int, margin: float = 1e-3) -> np.ndarray:
    ivs = fy.search_intervals(margin)
    lens = np.array([b - a for a, b in ivs])
    picks = rng.choice(len(ivs), size=k, p=lens / lens.sum())
    return np.array([rng.uniform(*ivs[i]) for i in picks])


# -- checks ---------------------------------------------------------------------------


def check_degenerate_band() -> tuple[bool, dict]:
    detail = {}
    ok = True
    for n in (8, 16):
        P = preset("remark", n=n)
        ch = ChannelAnalysis(P)
        i = P.grid.index_of([np.pi])
        lo, hi = ch.band3(i, i)
        width, center = hi - lo, 0.5 * (lo + hi)
        detail[f"n={n}"] = {"band": [lo, hi], "width": width, "center_error": abs(4.0 - center)}
        ok &= width <= 1e-12 and abs(4.0 - center) <= 1e-12
    return ok, detail


def closed_form_problem(n: int = 64):
    w3 = FunctionSpec("trigpoly", {"const": 1.0, "cos": [[], [], [-1.0]]})
    return make_problem(n, 1, w0=0.0, name="closed-form", w1=0.0, w2=0.0, w3=w3,
                        v1=1.0, v2=1.0, v3=1.0, v21=1.0, v22=1.0)


def closed_form_root() -> float:
    """Root below the band for ``w2 = 0, v3 = 1, w3 = 1 - cos t``.

    With ``u = -z`` the equation ``-z = int dt / (1 - cos t - z)`` becomes
    ``u = 2 pi / sqrt((1 + u)^2 - 1)``, i.e. ``u^4 + 2 u^3 = 4 pi^2``.
    """
    u = brentq(lambda u: u**4 + 2 * u**3 - 4 * np.pi**2, 0.0, 10.0, xtol=1e-15)
    return -u


def check_closed_form() -> tuple[bool, dict]:
    ch = ChannelAnalysis(closed_form_problem(64))
    z0 = min(ch.disc3(0, 0))
    ref = closed_form_root()
    err = abs(z0 - ref)
    return err <= 1e-6, {"disc3_root": z0, "quartic_root": ref, "error": err}


def check_delta3_lemma() -> tuple[bool, dict]:
    P = preset("symmetric", n=64)
    ch = ChannelAnalysis(P)
    rng = np.random.default_rng(SEED)
    worst_root, worst_eig, n_roots = 0.0, 0.0, 0
    for _ in range(20):
        p, q = (int(x) for x in rng.integers(0, P.N, size=2))
        ev = eig_sym(assemble_fiber("h3", P, p, q))
        roots = np.asarray(ch.disc3(p, q))
        lo, hi = ch.band3(p, q)
        outside = ev[(ev < lo - 1e-10) | (ev > hi + 1e-10)]
        n_roots += roots.size
        if roots.size:
            worst_root = max(worst_root, float(np.max(np.min(np.abs(roots[:, None] - ev[None, :]), axis=1))))
        if outside.size:
            if not roots.size:
                worst_eig = np.inf
            else:
                worst_eig = max(worst_eig, float(np.max(np.min(np.abs(outside[:, None] - roots[None, :]), axis=1))))
    ok = worst_root <= 1e-8 and worst_eig <= 1e-8
    return ok, {"roots_checked": n_roots, "max_root_to_eig": worst_root, "max_eig_to_root": worst_eig}


def check_convergence() -> tuple[bool, dict]:
    a, b = _symmetric_study(6), _symmetric_study(12)
    ok = True
    chans = {}
    for w in (1, 2, 3):
        d6, d12 = a["channels"][w]["delta"], b["channels"][w]["delta"]
        inside = a["channels"][w]["forward"] <= d6 and b["channels"][w]["forward"] <= d12
        chans[f"H{w}"] = {"delta6": d6, "delta12": d12, "within": inside}
        ok &= inside and d12 < d6
    h6, h12 = a["hausdorff"], b["hausdorff"]
    ok &= h12 <= 1.1 * h6
    return ok, {"channels": chans, "full_hausdorff6": h6, "full_hausdorff12": h12}


def check_hwz() -> tuple[bool, dict]:
    ok = True
    detail = {}
    gaps = []
    for n in (6, 12):
        s = _symmetric_study(n)
        ident = s["hwz"] == s["ess_min"]
        gap = abs(s["clustered_min"] - s["hwz"])
        gaps.append(gap)
        detail[f"n={n}"] = {
            "hwz_min": s["hwz"],
            "ess_min": s["ess_min"],
            "clustered_min": s["clustered_min"],
            "offset": gap,
            "delta": s["hausdorff"],
        }
        ok &= ident and gap <= s["hausdorff"]
    ok &= gaps[1] < gaps[0]
    return ok, detail


def _covered(inner: BandSet, outer: BandSet, tol: float) -> bool:
    for lo, hi in inner.intervals:
        if not any(a - tol <= lo and hi <= b + tol for a, b in outer.intervals):
            return False
    return all(outer.distance(p) <= tol for p in inner.points)


def check_corollary() -> tuple[bool, dict]:
    detail = {}
    for name in ("decoupled", "remark", "symmetric", "gap"):
        ch = ChannelAnalysis(preset(name, n=12))
        union = ch.channel_spectrum(1) | ch.channel_spectrum(2)
        detail[name] = _covered(ch.channel_spectrum(3), union, 1e-9)
    return all(detail.values()), detail


def check_fy_exactness() -> tuple[bool, dict]:
    P = preset("symmetric", n=8)
    fy = FYSolver(P)
    eigs = eig_sym(assemble_full(P))
    iso, _, rep = classify_spectrum(eigs, fy.excluded)
    bundles = fy.find_eigenvalues(fy.search_intervals(rep["tol"]))
    roots = np.array([b.z for b in bundles])
    same = roots.size == iso.size and (roots.size == 0 or np.max(np.abs(np.sort(roots) - iso)) <= 1e-8)
    dist = [fy.eig_distance(z) for z in roots]
    res = [b.residual for b in bundles]
    ok = bool(same) and all(d <= 1e-8 for d in dist) and all(r <= 1e-8 for r in res)
    return ok, {"fy_roots": roots.tolist(), "oracle_isolated": iso.tolist(), "eig_distance": dist, "residual": res}


def check_fy_fidelity() -> tuple[bool, dict]:
    fy = FYSolver(preset("symmetric", n=8))
    rng = np.random.default_rng(SEED + 1)
    zs = _admissible_z(fy, rng, 5)
    worst = 0.0
    for z in zs:
        lit, der = fy.reduced_system(z, "literal"), fy.reduced_system(z, "derived")
        worst = max(worst, float(np.max(np.abs(lit.A - der.A))), float(np.max(np.abs(lit.K - der.K))))
    return worst <= 1e-12, {"z": zs.tolist(), "max_entry_difference": worst}


def check_coeff_inverse() -> tuple[bool, dict]:
    P = preset("symmetric", n=8)
    fy = FYSolver(P)
    det = fy.det
    rng = np.random.default_rng(SEED + 2)
    zs = _admissible_z(fy, rng, 100)
    ps = rng.integers(0, P.N, size=100)
    worst = 0.0
    for p, z in zip(ps, zs):
        prod = det.coeff_matrix(int(p), z) @ det.coeff_inverse(int(p), z)
        worst = max(worst, float(np.max(np.abs(prod - np.eye(4)))))
    return worst <= 1e-12, {"samples": 100, "max_error": worst}


def check_pencil() -> tuple[bool, dict]:
    split, iv = _gap_split(8)
    roots = np.sort(pencil_spectrum(split, iv))
    lams, vecs = oracle_pairs(split, iv)
    match = roots.size == lams.size and (roots.size == 0 or np.max(np.abs(roots - lams)) <= 1e-8)
    res = [schur_residuals(split, lam, v) for lam, v in zip(lams, vecs.T)]
    ok = bool(match) and lams.size > 0 and all(a <= 1e-8 and b <= 1e-8 for a, b in res)
    return ok, {"interval": list(iv), "pencil": roots.tolist(), "oracle": lams.tolist(), "residuals": res}


def check_minmax() -> tuple[bool, dict]:
    split, iv = _gap_split(8)
    rep = minmax_verify(split, iv, n_random=100, seed=SEED)
    rng = np.random.default_rng(SEED + 3)
    mono = 0
    for _ in range(100):
        x = rng.standard_normal(split.blockA.dim)
        x /= np.linalg.norm(x)
        l1, l2 = np.sort(rng.uniform(*iv, size=2))
        mono += phi(split, x, l1) > phi(split, x, l2)
    alphas = np.linspace(iv[0], split.b_H + 1.0, 10)
    kap = [(kappa_alpha(split, a), int(np.sum(split.eigA < a))) for a in alphas]
    ok = rep["ok"] and bool(rep["items"]) and mono == 100 and all(k <= n for k, n in kap)
    return ok, {"minmax": rep, "monotone_probes": mono, "kappa_vs_count": kap}


def check_foundation() -> tuple[bool, dict]:
    detail = {}
    # rectangle rule on trigonometric monomials
    qerr = 0.0
    for n in (8, 12):
        t = TorusGrid(1, n).nodes
        for k in range(n):
            exact = 2 * np.pi if k == 0 else 0.0
            qerr = max(qerr, abs(quad_integrate(np.cos(k * t), TorusGrid(1, n)) - exact))
            qerr = max(qerr, abs(quad_integrate(np.sin(k * t), TorusGrid(1, n))))
    detail["quadrature_error"] = qerr

    P = preset("symmetric", n=6)
    H = assemble_full(P)
    sym = bool(np.array_equal(H.entries, H.entries.T))
    zeros = all(not np.any(H.block(i, j)) for i, j in ((0, 2), (0, 3), (1, 3)))
    detail["exact_symmetry"], detail["zero_pattern"] = sym, zeros

    ev = eig_sym(assemble_channel(3, P))
    fib = np.sort(np.concatenate([eig_sym(assemble_fiber("h3", P, p, q)) for p in range(P.N) for q in range(P.N)]))
    direct = float(np.max(np.abs(ev - fib)))
    detail["direct_integral_error"] = direct

    det = DeterminantEvaluator(P)
    ch = det.channel
    rng = np.random.default_rng(SEED + 4)
    bad3 = bad1 = 0
    for _ in range(500):
        p, q = (int(x) for x in rng.integers(0, P.N, size=2))
        lo, hi = det.m3[p, q], det.M3[p, q]
        if rng.random() < 0.5:
            z1, z2 = np.sort(rng.uniform(lo - 10, lo - 1e-6, size=2))
        else:
            z1, z2 = np.sort(rng.uniform(hi + 1e-6, hi + 10, size=2))
        bad3 += not det.delta3(p, q, z1) > det.delta3(p, q, z2)
        ivs = ch.ess_fiber12(p).complement(-ch.bound, ch.bound, guard=1e-6)
        a, b = ivs[rng.integers(len(ivs))]
        z1, z2 = np.sort(rng.uniform(a, b, size=2))
        bad1 += not det.delta1(p, z1) > det.delta1(p, z2)
    detail["delta3_monotone_failures"], detail["delta1_monotone_failures"] = bad3, bad1
    ok = qerr <= 1e-13 and sym and zeros and direct <= 1e-12 and bad3 == 0 and bad1 == 0
    return ok, detail


CHECKS: list[tuple[int, str, float, Callable[[], tuple[bool, dict]]]] = [
    (1, "degenerate band", 1.0, check_degenerate_band),
    (2, "closed-form root", 1.0, check_closed_form),
    (3, "delta3 lemma", 10.0, check_delta3_lemma),
    (4, "channel convergence", 180.0, check_convergence),
    (5, "hwz bottom", 180.0, check_hwz),
    (6, "channel inclusion", 30.0, check_corollary),
    (7, "fy exactness", 60.0, check_fy_exactness),
    (8, "literal/derived fidelity", 10.0, check_fy_fidelity),
    (9, "coefficient inverse", 1.0, check_coeff_inverse),
    (10, "transfer function", 60.0, check_pencil),
    (11, "rayleigh min-max", 60.0, check_minmax),
    (12, "foundation", 30.0, check_foundation),
]


def run_checks(numbers=None, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    out = []
    for num, name, budget, fn in CHECKS:
        if numbers is not None and num not in numbers:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, reported as such
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        dt = time.perf_counter() - t0
        res = CheckResult(num, name, bool(ok) and dt <= budget, dt, budget, _jsonable(detail))
        if dt > budget:
            res.detail["over_budget"] = True
        out.append(res)
        if echo is not None:
            echo(res.line())
    return out


def format_table(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} checks passed")
    return "\n".join(lines)
