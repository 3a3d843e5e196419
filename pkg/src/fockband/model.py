"""Problem instances: the torus grid, sampled parameter functions and presets.

A :class:`ModelProblem` fixes one instance of the four-sector block operator.
Every parameter function is sampled once on the grid; downstream modules only
ever see the sampled arrays.

Sampled arrays are indexed by *flat* torus points.  With ``N = n**nu`` points
on one copy of the torus, a function of arity ``k`` is stored with shape
``(N,) * k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

__all__ = [
    "ProblemError",
    "TorusGrid",
    "FunctionSpec",
    "ModelProblem",
    "ARITY",
    "PRESETS",
    "dispersion",
    "quad_integrate",
    "parse_problem",
    "load_problem",
    "make_problem",
    "preset",
]

#: arity of every parameter function, keyed by its name in the problem file
ARITY = {"w1": 1, "v1": 1, "v2": 1, "v3": 1, "v21": 1, "v22": 1, "w2": 2, "w3": 3}

KINDS = ("constant", "trigpoly", "dispersion-sum", "tabulated")

PRESETS = ("decoupled", "remark", "symmetric", "gap")


class ProblemError(ValueError):
    """Raised when a problem document or preset request is invalid."""


def dispersion(t: np.ndarray) -> np.ndarray:
    """Lattice dispersion ``nu - sum_i cos t_i`` over the last axis of `t`."""
    t = np.asarray(t, dtype=float)
    return t.shape[-1] - np.cos(t).sum(axis=-1)


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the torus ``(-pi, pi]**nu``.

    Per-axis nodes are ``-pi + 2*pi*(k+1)/n`` for ``k = 0..n-1``, so the last
    node is ``pi``.
    """

    nu: int = 1
    n: int = 12

    def __post_init__(self):
        if not isinstance(self.nu, (int, np.integer)) or self.nu not in (1, 2):
            raise ProblemError(f"nu must be 1 or 2, got {self.nu!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 2 or self.n % 2:
            raise ProblemError(f"n must be an even integer >= 2, got {self.n!r}")

    @property
    def nodes(self) -> np.ndarray:
        k = np.arange(self.n)
        return -np.pi + 2.0 * np.pi * (k + 1) / self.n

    @property
    def weight(self) -> float:
        return (2.0 * np.pi / self.n) ** self.nu

    @property
    def size(self) -> int:
        """Number of points on one copy of the torus."""
        return self.n**self.nu

    @property
    def points(self) -> np.ndarray:
        """Array of shape ``(size, nu)``; flat index runs in C order over axes."""
        axes = np.meshgrid(*([self.nodes] * self.nu), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def index_of(self, point) -> int:
        """Flat index of the grid point closest to `point` (modulo 2*pi)."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.nu,):
            raise ProblemError(f"point must have {self.nu} coordinates")
        idx = 0
        for x in point:
            k = int(np.rint((x + np.pi) * self.n / (2.0 * np.pi))) - 1
            idx = idx * self.n + (k % self.n)
        return idx


def _broadcast_args(grid: TorusGrid, arity: int) -> list[np.ndarray]:
    pts = grid.points
    out = []
    for i in range(arity):
        shape = [1] * arity + [grid.nu]
        shape[i] = grid.size
        out.append(pts.reshape(shape))
    return out


@dataclass(frozen=True)
class FunctionSpec:
    """Declarative description of one real parameter function.

    kind
        ``constant``: payload ``{"value": c}``.
        ``trigpoly``: payload ``{"const": c0, "cos": [[a_1, a_2, ...], ...],
        "sin": [...]}`` with one coefficient list per coordinate axis
        (``arity * nu`` axes); the function is
        ``c0 + sum_j sum_k a_jk cos(k x_j) + b_jk sin(k x_j)``.
        ``dispersion-sum``: payload ``{"const": c0, "terms": [{"coeff": c,
        "combo": [m_1, ..., m_arity]}, ...]}``; each term contributes
        ``c * eps(m_1 x_1 + ... + m_arity x_arity)``.
        ``tabulated``: payload ``{"values": nested list}`` of shape
        ``(n**nu,) * arity`` or ``(n,) * (nu * arity)``.
    """

    kind: str
    payload: Mapping[str, Any] = field(default_factory=dict)

    def sample(self, grid: TorusGrid, arity: int, name: str = "function") -> np.ndarray:
        shape = (grid.size,) * arity
        p = self.payload
        if self.kind == "constant":
            out = np.full(shape, _number(p.get("value"), f"{name}.value"))
        elif self.kind == "trigpoly":
            out = self._trigpoly(grid, arity, name)
        elif self.kind == "dispersion-sum":
            out = self._dispersion_sum(grid, arity, name)
        elif self.kind == "tabulated":
            vals = np.asarray(p.get("values"), dtype=float)
            alt = (grid.n,) * (grid.nu * arity)
            if vals.shape not in (shape, alt):
                raise ProblemError(
                    f"{name}: tabulated shape {vals.shape} does not match arity {arity} "
                    f"on the grid (expected {shape} or {alt})"
                )
            out = vals.reshape(shape)
        else:
            raise ProblemError(f"{name}: unknown kind {self.kind!r}")
        out = np.ascontiguousarray(out, dtype=float)
        if not np.all(np.isfinite(out)):
            raise ProblemError(f"{name}: non-finite sampled value")
        return out

    def _trigpoly(self, grid, arity, name):
        p = self.payload
        naxes = arity * grid.nu
        out = np.full((grid.size,) * arity, _number(p.get("const", 0.0), f"{name}.const"))
        args = _broadcast_args(grid, arity)
        for key, fn in (("cos", np.cos), ("sin", np.sin)):
            coeffs = p.get(key, [])
            if len(coeffs) > naxes:
                raise ProblemError(f"{name}.{key}: {len(coeffs)} axis lists for {naxes} axes")
            for j, row in enumerate(coeffs):
                x = args[j // grid.nu][..., j % grid.nu]
                for k, c in enumerate(row, start=1):
                    out = out + _number(c, f"{name}.{key}") * fn(k * x)
        return out

    def _dispersion_sum(self, grid, arity, name):
        p = self.payload
        out = np.full((grid.size,) * arity, _number(p.get("const", 0.0), f"{name}.const"))
        args = _broadcast_args(grid, arity)
        for term in p.get("terms", []):
            combo = term.get("combo")
            if combo is None or len(combo) != arity:
                raise ProblemError(f"{name}: dispersion term needs a combo of length {arity}")
            arg = sum(int(m) * a for m, a in zip(combo, args))
            out = out + _number(term.get("coeff", 1.0), f"{name}.coeff") * dispersion(arg)
        return out

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.payload}


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ProblemError(f"{where}: expected a number, got {x!r}")
    if not np.isfinite(x):
        raise ProblemError(f"{where}: non-finite value")
    return float(x)


@dataclass(frozen=True, eq=False)
class ModelProblem:
    """One instance of the operator: grid, ``w0`` and sampled functions."""

    grid: TorusGrid
    w0: float
    specs: Mapping[str, FunctionSpec]
    name: str = "custom"

    def __post_init__(self):
        missing = set(ARITY) - set(self.specs)
        if missing:
            raise ProblemError(f"missing functions: {sorted(missing)}")
        _number(self.w0, "w0")
        sampled = {k: self.specs[k].sample(self.grid, ARITY[k], k) for k in ARITY}
        for arr in sampled.values():
            arr.setflags(write=False)
        object.__setattr__(self, "_sampled", sampled)

    def __getattr__(self, item):
        sampled = self.__dict__.get("_sampled")
        if sampled is not None and item in sampled:
            return sampled[item]
        raise AttributeError(item)

    @property
    def N(self) -> int:
        return self.grid.size

    @property
    def weight(self) -> float:
        return self.grid.weight

    def with_grid(self, n: int | None = None, nu: int | None = None) -> "ModelProblem":
        grid = TorusGrid(nu=self.grid.nu if nu is None else nu, n=self.grid.n if n is None else n)
        return ModelProblem(grid, self.w0, self.specs, self.name)

    def with_w0(self, w0: float) -> "ModelProblem":
        return ModelProblem(self.grid, float(w0), self.specs, self.name)

    def spectral_bound(self) -> float:
        """Upper bound on the operator norm of the operator and all its fibers."""
        wt = self.weight
        norm = lambda v: float(np.sqrt(wt * np.sum(v * v)))
        diag = max(abs(self.w0), *(float(np.abs(getattr(self, k)).max()) for k in ("w1", "w2", "w3")))
        return (
            diag
            + 2.0 * (norm(self.v1) + norm(self.v2) + norm(self.v3))
            + norm(self.v21) ** 2
            + norm(self.v22) ** 2
        )

    def to_json(self) -> dict:
        return {
            "nu": self.grid.nu,
            "n": self.grid.n,
            "w0": self.w0,
            "functions": {k: self.specs[k].to_json() for k in ARITY},
        }


def quad_integrate(samples, grid: TorusGrid) -> float:
    """Rectangle rule over one copy of the torus."""
    samples = np.asarray(samples, dtype=float)
    if samples.size != grid.size:
        raise ProblemError(f"expected {grid.size} samples, got {samples.size}")
    return grid.weight * float(np.sum(samples))


def _spec_from_json(name: str, doc) -> FunctionSpec:
    if not isinstance(doc, Mapping):
        raise ProblemError(f"{name}: spec must be an object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ProblemError(f"{name}: kind must be one of {KINDS}, got {kind!r}")
    allowed = {
        "constant": {"value"},
        "trigpoly": {"const", "cos", "sin"},
        "dispersion-sum": {"const", "terms"},
        "tabulated": {"values"},
    }[kind]
    payload = {k: v for k, v in doc.items() if k != "kind"}
    unknown = set(payload) - allowed
    if unknown:
        raise ProblemError(f"{name}: unknown keys {sorted(unknown)} for kind {kind!r}")
    return FunctionSpec(kind, payload)


def parse_problem(text: str | Mapping, name: str = "custom") -> ModelProblem:
    """Build a :class:`ModelProblem` from a JSON problem document."""
    if isinstance(text, Mapping):
        doc = text
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProblemError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ProblemError("problem document must be a JSON object")
    unknown = set(doc) - {"nu", "n", "w0", "functions"}
    if unknown:
        raise ProblemError(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("nu", "n"):
        if key in doc and (isinstance(doc[key], bool) or not isinstance(doc[key], int)):
            raise ProblemError(f"{key}: expected an integer")
    funcs = doc.get("functions")
    if not isinstance(funcs, Mapping):
        raise ProblemError("functions: expected an object")
    unknown = set(funcs) - set(ARITY)
    if unknown:
        raise ProblemError(f"functions: unknown keys {sorted(unknown)}")
    missing = set(ARITY) - set(funcs)
    if missing:
        raise ProblemError(f"functions: missing {sorted(missing)}")
    grid = TorusGrid(nu=doc.get("nu", 1), n=doc.get("n", 12))
    specs = {k: _spec_from_json(k, funcs[k]) for k in ARITY}
    return ModelProblem(grid, _number(doc.get("w0", 0.0), "w0"), specs, name)


def load_problem(path) -> ModelProblem:
    with open(path) as fh:
        return parse_problem(fh.read(), name=str(path))


def make_problem(n: int = 12, nu: int = 1, w0: float = 0.0, name: str = "custom", **specs) -> ModelProblem:
    """Convenience constructor; numbers are promoted to constant specs."""
    full = {}
    for key in ARITY:
        s = specs.pop(key, 0.0)
        full[key] = s if isinstance(s, FunctionSpec) else FunctionSpec("constant", {"value": float(s)})
    if specs:
        raise ProblemError(f"unknown functions: {sorted(specs)}")
    return ModelProblem(TorusGrid(nu=nu, n=n), float(w0), full, name)


def _eps_sum(*combos, const: float = 0.0) -> FunctionSpec:
    return FunctionSpec(
        "dispersion-sum",
        {"const": const, "terms": [{"coeff": 1.0, "combo": list(c)} for c in combos]},
    )


def preset(name: str, n: int = 12, nu: int = 1) -> ModelProblem:
    """Named problem instances.

    ``decoupled``  all couplings zero, ``w0 = -1`` below every band.
    ``remark``     ``w3 = eps(p) + eps(q+t) + eps(t)``; degenerate fiber band
                   at ``p = q = pi``.
    ``symmetric``  ``w2``, ``w3`` symmetric in their first two arguments.
    ``gap``        ``symmetric`` with ``w1`` (and ``w0``) lifted above the top of
                   the sectors-2,3 block; see :func:`fockband.pencil.gap_shift`.
    """
    one = {k: 1.0 for k in ("v1", "v2", "v3", "v21", "v22")}
    sym = dict(w1=_eps_sum((1,)), w2=_eps_sum((1, 0), (0, 1)), w3=_eps_sum((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    if name == "decoupled":
        return make_problem(n, nu, w0=-1.0, name=name, **sym)
    if name == "remark":
        return make_problem(
            n, nu, w0=0.0, name=name, w1=_eps_sum((1,)), w2=0.0,
            w3=_eps_sum((1, 0, 0), (0, 1, 1), (0, 0, 1)), **one,
        )
    if name == "symmetric":
        return make_problem(n, nu, w0=0.0, name=name, **sym, **one)
    if name == "gap":
        from .oracle import assemble_full
        from .pencil import check_gap, gap_shift, split_blocks

        base = make_problem(n, nu, w0=0.0, name=name, **sym, **one)
        shift, w0 = gap_shift(base)
        prob = make_problem(n, nu, w0=w0, name=name, **{**sym, "w1": _eps_sum((1,), const=shift)}, **one)
        check_gap(split_blocks(assemble_full(prob)))
        return prob
    raise ProblemError(f"unknown preset {name!r}; choose from {PRESETS}")
