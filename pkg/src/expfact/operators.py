"""Time-dependent operators A(t), uniform grids and cumulative quadrature."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .linalg import RHO_X, RHO_Y, SIGMA_X, SIGMA_Y, as_matrix, expm

SCALAR_KINDS = {
    "const": ("c",),
    "power": ("k",),
    "sin": ("omega",),
    "cos": ("omega",),
    "exp": ("a",),
}


class ConfigError(ValueError):
    """Malformed operator definition."""


@dataclass(frozen=True)
class ScalarFunction:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SCALAR_KINDS:
            raise ConfigError(f"unknown scalar kind {self.kind!r}")
        missing = [p for p in SCALAR_KINDS[self.kind] if p not in self.params]
        if missing:
            raise ConfigError(f"scalar kind {self.kind!r} needs params {missing}")
        for v in self.params.values():
            if not math.isfinite(float(v)):
                raise ConfigError("scalar parameters must be finite")
        if self.kind == "power" and (int(self.params["k"]) != self.params["k"] or self.params["k"] < 0):
            raise ConfigError("power exponent k must be a nonnegative integer")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == "const":
            return np.full_like(t, float(p["c"]))
        if self.kind == "power":
            return t ** int(p["k"])
        if self.kind == "sin":
            return np.sin(float(p["omega"]) * t)
        if self.kind == "cos":
            return np.cos(float(p["omega"]) * t)
        return np.exp(float(p["a"]) * t)


@dataclass(frozen=True)
class OperatorFunction:
    """A(t) = sum_i f_i(t) M_i with f_i from a closed scalar catalog."""

    terms: tuple[tuple[ScalarFunction, np.ndarray], ...]

    def __post_init__(self):
        if not self.terms:
            raise ConfigError("operator needs at least one term")
        mats = [as_matrix(m) for _, m in self.terms]
        dims = {m.shape[0] for m in mats}
        if len(dims) != 1:
            raise ConfigError(f"all term matrices must share one dimension, got {sorted(dims)}")
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "terms", tuple((f, m) for (f, _), m in zip(self.terms, mats)))

    @property
    def dim(self) -> int:
        return self.terms[0][1].shape[0]

    def __call__(self, t) -> np.ndarray:
        """Evaluate at a scalar t (one matrix) or an array of times (a stack)."""
        t_arr = np.asarray(t, dtype=float)
        out = sum(f(t_arr)[..., None, None] * m for f, m in self.terms)
        return np.asarray(out, dtype=complex)

    @classmethod
    def constant(cls, m) -> "OperatorFunction":
        return cls(((ScalarFunction("const", {"c": 1.0}), np.asarray(m, dtype=complex)),))


def evaluate(f, t) -> np.ndarray:
    return f(t)


class ConjugatedOperator:
    """t -> expm(-t A) B expm(t A), evaluated by two exponentials per node."""

    def __init__(self, a, b):
        self.a = as_matrix(a)
        self.b = as_matrix(b)
        if self.a.shape != self.b.shape:
            raise ValueError(f"dimension mismatch: {self.a.shape} vs {self.b.shape}")

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def __call__(self, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=float)
        ta = t_arr[..., None, None] * self.a
        return expm(-ta) @ self.b @ expm(ta)


@dataclass(frozen=True)
class Grid:
    t0: float
    t1: float
    n_nodes: int

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("grid needs at least two nodes")
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or self.t1 <= self.t0:
            raise ValueError("grid needs finite t0 < t1")

    @property
    def h(self) -> float:
        return (self.t1 - self.t0) / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.n_nodes)


@dataclass(frozen=True)
class GridSeries:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[0] != self.grid.n_nodes or v.shape[1] != v.shape[2]:
            raise ValueError(f"values must have shape ({self.grid.n_nodes}, d, d), got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, i) -> np.ndarray:
        return self.values[i]


def sample(f, grid: Grid) -> GridSeries:
    return GridSeries(grid, f(grid.nodes))


def cumint(s: GridSeries) -> GridSeries:
    """Cumulative composite-trapezoid integral from t0, zero at the first node."""
    vals = cumulative_trapezoid(s.values, dx=s.grid.h, axis=0, initial=0)
    return GridSeries(s.grid, vals)


def _cumint_values(values: np.ndarray, h: float) -> np.ndarray:
    return cumulative_trapezoid(values, dx=h, axis=0, initial=0)


# ---------------------------------------------------------------------------
# built-in operators and the declarative config format


def su2_bellman_operator(a: float) -> OperatorFunction:
    """expm(-i a t sz) (i sx) expm(i a t sz) = i (cos(2at) sx + sin(2at) sy)."""
    return OperatorFunction((
        (ScalarFunction("cos", {"omega": 2 * a}), 1j * SIGMA_X),
        (ScalarFunction("sin", {"omega": 2 * a}), 1j * SIGMA_Y),
    ))


def so3_bellman_operator(alpha: float, theta: float) -> OperatorFunction:
    """expm(-t phi rz) rx expm(t phi rz) = cos(phi t) rx - sin(phi t) ry, phi = alpha cos(theta)."""
    phi = alpha * math.cos(theta)
    return OperatorFunction((
        (ScalarFunction("cos", {"omega": phi}), RHO_X),
        (ScalarFunction("sin", {"omega": phi}), -RHO_Y),
    ))


def operator_from_config(doc: Mapping) -> OperatorFunction:
    """Build an operator from ``{dim, terms: [{kind, params, matrix}]}``.

    ``matrix`` is a row-major list of ``[re, im]`` pairs of length dim**2.
    """
    try:
        dim = int(doc["dim"])
        raw_terms = doc["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"operator config needs 'dim' and 'terms': {exc}") from None
    if dim < 1 or not isinstance(raw_terms, Sequence) or not raw_terms:
        raise ConfigError("operator config needs dim >= 1 and a nonempty term list")
    terms = []
    for i, term in enumerate(raw_terms):
        try:
            f = ScalarFunction(term["kind"], dict(term.get("params", {})))
            pairs = term["matrix"]
            if len(pairs) != dim * dim:
                raise ConfigError(f"term {i}: matrix needs {dim * dim} entries, got {len(pairs)}")
            m = np.array([complex(float(re), float(im)) for re, im in pairs]).reshape(dim, dim)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"term {i}: {exc}") from None
        terms.append((f, m))
    return OperatorFunction(tuple(terms))


def operator_to_config(op: OperatorFunction) -> dict:
    return {
        "dim": op.dim,
        "terms": [
            {
                "kind": f.kind,
                "params": dict(f.params),
                "matrix": [[float(z.real), float(z.imag)] for z in m.ravel()],
            }
            for f, m in op.terms
        ],
    }


def load_operator(spec: str) -> OperatorFunction:
    """Resolve ``su2(a)``, ``so3(alpha,theta)`` or a path to a JSON config."""
    s = spec.strip()
    for name, builder, nargs in (("su2", su2_bellman_operator, 1), ("so3", so3_bellman_operator, 2)):
        if s.startswith(name + "(") and s.endswith(")"):
            try:
                args = [float(v) for v in s[len(name) + 1:-1].split(",")]
            except ValueError:
                raise ConfigError(f"bad arguments in {spec!r}") from None
            if len(args) != nargs:
                raise ConfigError(f"{name} takes {nargs} argument(s)")
            return builder(*args)
    path = Path(s)
    if not path.is_file():
        raise ConfigError(f"operator spec {spec!r} is neither a built-in nor an existing file")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return operator_from_config(doc)
