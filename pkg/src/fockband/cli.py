"""Command-line interface: ``fockband <verb> [--preset NAME | --problem FILE] [options]``.

Exit status is 0 on success, 1 when a computation is asked for at a point it
is undefined (for instance a spectral parameter inside a band) and 2 on usage
errors.  ``verify`` exits 1 if any acceptance check fails.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys

import numpy as np

from .determinant import DomainError
from .model import PRESETS, ProblemError, load_problem, preset

__all__ = ["main", "build_parser", "dumps"]

VERBS = ("bands", "spectrum", "essential", "hwz", "eigs", "pencil", "scan", "verify")


class UsageError(Exception):
    pass


# -- output ------------------------------------------------------------------------------


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".15g")
    return "0" if s == "-0" else s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with fixed key order and 15 significant digits for every float."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_num(v) if isinstance(v, (float, np.floating)) else str(int(v)) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent, _level + 1) for v in seq) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _csv(header, rows) -> str:
    out = [",".join(header)]
    for r in rows:
        out.append(",".join(_num(v).strip('"') if isinstance(v, (float, np.floating)) else str(v) for v in r))
    return "\n".join(out) + "\n"


def _bands_json(bs) -> dict:
    return {"intervals": [list(iv) for iv in bs.intervals], "points": list(bs.points)}


def _bands_rows(name, bs):
    rows = [(name, lo, hi) for lo, hi in bs.intervals]
    rows += [(name, p, p) for p in bs.points]
    return rows


# -- verbs ---------------------------------------------------------------------------------


def _channel(problem):
    from .channel import ChannelAnalysis

    return ChannelAnalysis(problem)


def cmd_bands(problem, args):
    ch = _channel(problem)
    ess, br = ch.essential_spectrum()
    sets = {"four": br.four, "three": br.three, "two1": br.two1, "two2": br.two2, "essential": ess}
    payload = {k: _bands_json(v) for k, v in sets.items()}
    payload["hwz_min"] = ch.hwz_min()
    grid = problem.grid
    payload["degenerate_fibers"] = [
        {"p": grid.points[p].tolist(), "q": grid.points[q].tolist(), "value": v}
        for p, q, v in ch.degenerate_fibers()
    ]
    rows = [r for k, v in sets.items() for r in _bands_rows(k, v)]
    return payload, ("set", "lo", "hi"), rows


def cmd_essential(problem, args):
    ch = _channel(problem)
    ess, _ = ch.essential_spectrum()
    payload = {
        "essential": _bands_json(ess),
        "channels": {f"H{w}": _bands_json(ch.channel_spectrum(w)) for w in (1, 2, 3)},
    }
    rows = _bands_rows("essential", ess)
    for w in (1, 2, 3):
        rows += _bands_rows(f"H{w}", ch.channel_spectrum(w))
    return payload, ("set", "lo", "hi"), rows


def cmd_hwz(problem, args):
    ch = _channel(problem)
    ess, _ = ch.essential_spectrum()
    payload = {
        "hwz_min": ch.hwz_min(),
        "min_H1": ch.channel_spectrum(1).min,
        "min_H2": ch.channel_spectrum(2).min,
        "min_essential": ess.min,
    }
    return payload, ("quantity", "value"), list(payload.items())


def _zwindow(args):
    lo = -np.inf if args.z_min is None else args.z_min
    hi = np.inf if args.z_max is None else args.z_max
    if lo >= hi:
        raise UsageError("--z-min must be below --z-max")
    return lo, hi


def cmd_spectrum(problem, args):
    from .oracle import assemble_full, classify_spectrum, eig_sym

    ess, _ = _channel(problem).essential_spectrum()
    eigs = eig_sym(assemble_full(problem))
    iso, _, rep = classify_spectrum(eigs, ess, args.tol)
    lo, hi = _zwindow(args)
    keep = (eigs >= lo) & (eigs <= hi)
    iso_set = set(iso.tolist())
    rows = [(i, float(e), "isolated" if e in iso_set else "clustered") for i, e in enumerate(eigs) if keep[i]]
    payload = {
        "dimension": int(eigs.size),
        "report": rep,
        "isolated": [float(e) for e in iso if lo <= e <= hi],
        "eigenvalues": [float(r[1]) for r in rows],
    }
    return payload, ("index", "eigenvalue", "class"), rows


def _sector_norms(problem, x):
    N = problem.N
    x = x / np.linalg.norm(x)
    cuts = np.cumsum([1, N, N * N])
    return [float(np.linalg.norm(part)) for part in np.split(x, cuts)]


def cmd_eigs(problem, args):
    from .fy import FYSolver
    from .oracle import assemble_full, classify_spectrum, eig_sym

    lo, hi = _zwindow(args)
    fy = FYSolver(problem)
    H = assemble_full(problem)
    if args.method == "oracle":
        w, V = eig_sym(H, vectors=True)
        iso, _, rep = classify_spectrum(w, fy.excluded, args.tol)
        found = []
        for z in iso:
            if not lo <= z <= hi:
                continue
            v = V[:, int(np.argmin(np.abs(w - z)))]
            res = float(np.linalg.norm(H.entries @ v - z * v))
            found.append({"z": float(z), "residual": res, "sector_norms": _sector_norms(problem, v)})
    else:
        from .oracle import cluster_tol

        tol = args.tol if args.tol is not None else cluster_tol(H.dim, fy.excluded)
        ivs = [(max(a, lo), min(b, hi)) for a, b in fy.search_intervals(tol) if min(b, hi) > max(a, lo)]
        found = []
        for b in fy.find_eigenvalues(ivs):
            item = {"z": b.z, "residual": b.residual, "sector_norms": _sector_norms(problem, fy.scaled(b.full))}
            if args.format == "json":
                item["psi"] = b.psi.tolist()
                item["f"] = [np.ravel(f).tolist() for f in b.full]
            found.append(item)
    rows = [(e["z"], e["residual"], *e["sector_norms"]) for e in found]
    payload = {"method": args.method, "eigenvalues": found}
    return payload, ("z", "residual", "norm_f0", "norm_f1", "norm_f2", "norm_f3"), rows


def cmd_pencil(problem, args):
    from .oracle import assemble_full
    from .pencil import check_gap, eval_L, kappa_alpha, minmax_verify, pencil_spectrum, split_blocks

    split = split_blocks(assemble_full(problem))
    bC, aA = check_gap(split)
    a = bC + 1e-6 if args.z_min is None else args.z_min
    b = aA - 1e-6 if args.z_max is None else args.z_max
    if not a < b:
        raise UsageError("empty pencil interval")
    roots = pencil_spectrum(split, (a, b))
    lams = np.linspace(a, b, 200)
    curve = [(float(l), float(np.min(np.linalg.eigvalsh(eval_L(split, l).entries)))) for l in lams]
    payload = {
        "interval": [a, b],
        "b_C": bC,
        "a_ess_A": aA,
        "kappa_alpha": kappa_alpha(split, a),
        "roots": [float(r) for r in roots],
        "minmax_report": minmax_verify(split, (a, b)),
    }
    return payload, ("lambda", "min_eig_L"), curve


def cmd_scan(problem, args):
    if args.z_min is None or args.z_max is None:
        raise UsageError("scan needs --z-min and --z-max")
    lo, hi = _zwindow(args)
    zs = np.linspace(lo, hi, args.points)
    if args.target == "delta3":
        from .determinant import DeterminantEvaluator

        det = DeterminantEvaluator(problem)
        vals = det.scan_delta3(args.p, args.q, zs)
        rows = [(args.p, args.q, float(z), float(v)) for z, v in zip(zs, vals)]
        return {"p": args.p, "q": args.q, "z": zs.tolist(), "delta3": vals.tolist()}, ("p", "q", "z", "delta3"), rows
    if args.target == "delta12":
        from .determinant import DeterminantEvaluator

        d1, d2 = DeterminantEvaluator(problem).scan_delta12(args.p, zs)
        rows = [(args.p, float(z), float(a), float(b)) for z, a, b in zip(zs, d1, d2)]
        return {"p": args.p, "z": zs.tolist(), "delta1": d1.tolist(), "delta2": d2.tolist()}, ("p", "z", "delta1", "delta2"), rows

    from .fy import FYSolver

    fy = FYSolver(problem)
    rows = []
    for z in zs:
        try:
            rows.append((float(z), fy.eig_distance(z), 1))
        except DomainError:
            rows.append((float(z), float("nan"), 0))
    payload = {"z": [r[0] for r in rows], "eig_distance": [r[1] for r in rows], "admissible": [r[2] for r in rows]}
    return payload, ("z", "eig_distance", "admissible"), rows


COMMANDS = {
    "bands": cmd_bands,
    "spectrum": cmd_spectrum,
    "essential": cmd_essential,
    "hwz": cmd_hwz,
    "eigs": cmd_eigs,
    "pencil": cmd_pencil,
    "scan": cmd_scan,
}


# -- plumbing -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockband", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        sp = sub.add_parser(verb)
        if verb == "verify":
            sp.add_argument("--check", type=int, action="append", help="run only these check numbers")
            sp.add_argument("--out", help="write the JSON report here")
            continue
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", choices=PRESETS)
        src.add_argument("--problem", help="path to a JSON problem file")
        sp.add_argument("--n", type=int, help="points per torus axis")
        sp.add_argument("--nu", type=int, help="torus dimension")
        sp.add_argument("--tol", type=float, help="clustering tolerance for oracle classification")
        sp.add_argument("--z-min", type=float, dest="z_min")
        sp.add_argument("--z-max", type=float, dest="z_max")
        sp.add_argument("--method", choices=("fy", "oracle"), default="fy")
        sp.add_argument("--points", type=int, default=200, help="scan points")
        sp.add_argument("--target", choices=("fy", "delta3", "delta12"), default="fy", help="scanned quantity")
        sp.add_argument("--p", type=int, default=0, help="first grid node for determinant scans")
        sp.add_argument("--q", type=int, default=0, help="second grid node for determinant scans")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _load(args):
    if args.preset is not None:
        kw = {k: v for k, v in (("n", args.n), ("nu", args.nu)) if v is not None}
        return preset(args.preset, **kw)
    problem = load_problem(args.problem)
    if args.n is not None or args.nu is not None:
        problem = problem.with_grid(args.n, args.nu)
    return problem


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _threads():
    n = os.environ.get("FOCKBAND_THREADS")
    if not n:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=int(n))


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    with _threads():
        if args.verb == "verify":
            from .verify import format_table, run_checks

            results = run_checks(set(args.check) if args.check else None)
            print(format_table(results))
            if args.out:
                _emit(dumps([r.to_json() for r in results]) + "\n", args.out)
            return 0 if all(r.passed for r in results) else 1
        try:
            problem = _load(args)
            payload, header, rows = COMMANDS[args.verb](problem, args)
        except (UsageError, ProblemError, OSError) as exc:
            print(f"fockband {args.verb}: {exc}", file=sys.stderr)
            return 2
        except DomainError as exc:
            print(f"fockband {args.verb}: {exc}", file=sys.stderr)
            return 1
        if args.format == "csv":
            text = _csv(header, rows)
        else:
            text = dumps({"problem": problem.name, "n": problem.grid.n, "nu": problem.grid.nu, **payload}) + "\n"
        _emit(text, args.out)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
