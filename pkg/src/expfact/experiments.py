"""Worked examples: the SU(2) and SO(3) Bellman problems and Dyson checks."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import bound_coefficients, extrapolate_radius
from .linalg import RHO_X, RHO_Z, SIGMA_X, SIGMA_Y, SIGMA_Z, expm
from .operators import (Grid, GridSeries, _cumint_values, so3_bellman_operator,
                        su2_bellman_operator)
from .permsym import partition_coefficient, partitions
from .wilcox import wilcox_generators

WILCOX_BOUND_MARKER = 0.658
DEFAULT_NODES = 20001


@dataclass
class ErrorSweep:
    parameter: str
    values: np.ndarray
    columns: dict[str, np.ndarray]
    oracle: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != self.values.shape:
                raise ValueError(f"column {name!r} has shape {col.shape}, expected {self.values.shape}")
            if not np.all(np.isfinite(col)):
                raise ValueError(f"column {name!r} has non-finite entries")
            self.columns[name] = col

    @property
    def header(self) -> list[str]:
        return [self.parameter, *self.columns]

    def rows(self):
        cols = list(self.columns.values())
        for i, v in enumerate(self.values):
            yield [v, *(c[i] for c in cols)]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("EXPFACT_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# SU(2): exp(i(a sz + eps sx)) = exp(i a sz) exp(eps W_1) exp(eps^2 W_2) ...


def su2_table1(a: float, t: float, k: int) -> np.ndarray:
    """Closed form of the k-th SU(2) Bellman exponent with the factor i removed.

    The generator of the product expansion is i times this matrix.  With
    S = sin(2at), C = cos(2at):
      k=1  [S sx + (1-C) sy] / (2a)
      k=2  (2at - S) sz / (4a^2)
      k=3  {[6at + (C-4)S] sx - (1-C)^2 sy} / (12a^3)
      k=4  -[6at + (C-4)S] sz / (16a^4)
      k=5  {[56S - (4C+7)SC - 10at(7+4C-2C^2)] sx
            + [4C^3 - 7C^2 - 28C + 31 + 20at(SC - 4S + 3at)] sy} / (240a^5)
    """
    if a == 0:
        raise ValueError("a must be nonzero")
    if k not in (1, 2, 3, 4, 5):
        raise ValueError("k must be in 1..5")
    at = a * t
    S, C = math.sin(2 * at), math.cos(2 * at)
    if k == 1:
        return (S * SIGMA_X + (1 - C) * SIGMA_Y) / (2 * a)
    if k == 2:
        return (2 * at - S) * SIGMA_Z / (4 * a ** 2)
    if k == 3:
        return ((6 * at + (C - 4) * S) * SIGMA_X - (1 - C) ** 2 * SIGMA_Y) / (12 * a ** 3)
    if k == 4:
        return -(6 * at + (C - 4) * S) * SIGMA_Z / (16 * a ** 4)
    fx = 56 * S - (4 * C + 7) * S * C - 10 * at * (7 + 4 * C - 2 * C ** 2)
    fy = 4 * C ** 3 - 7 * C ** 2 - 28 * C + 31 + 20 * at * (S * C - 4 * S + 3 * at)
    return (fx * SIGMA_X + fy * SIGMA_Y) / (240 * a ** 5)


def su2_generators(a: float, order: int, n_nodes: int = DEFAULT_NODES) -> list[np.ndarray]:
    """W_1(1) .. W_order(1) for the SU(2) Bellman problem (skew-Hermitian)."""
    ws, _ = wilcox_generators(su2_bellman_operator(a), Grid(0.0, 1.0, n_nodes), order)
    return [w[-1] for w in ws]


def su2_approximant(a: float, eps: float, generators, m: int) -> np.ndarray:
    u = expm(1j * a * SIGMA_Z)
    for k in range(1, m + 1):
        u = u @ expm(eps ** k * generators[k - 1])
    return u


def su2_exact(a: float, eps: float) -> np.ndarray:
    return expm(1j * (a * SIGMA_Z + eps * SIGMA_X))


def su2_sweep(a: float, eps_values, max_order: int = 11, n_nodes: int = DEFAULT_NODES) -> ErrorSweep:
    """|U_12|^2 of odd-order truncated products and their absolute errors.

    Even orders are omitted: W_2k is proportional to sz, so appending its
    factor only rephases a column and leaves |U_12|^2 unchanged.
    """
    if a == 0:
        raise ValueError("a must be nonzero")
    eps_values = np.asarray(eps_values, dtype=float)
    gens = su2_generators(a, max_order, n_nodes)
    orders = list(range(1, max_order + 1, 2))
    exact = np.array([abs(su2_exact(a, e)[0, 1]) ** 2 for e in eps_values])
    columns: dict[str, np.ndarray] = {"exact_u12sq": exact}
    approx = {m: np.empty_like(eps_values) for m in orders}
    for i, e in enumerate(eps_values):
        u = expm(1j * a * SIGMA_Z)
        for k in range(1, max_order + 1):
            u = u @ expm(e ** k * gens[k - 1])
            if k in approx:
                approx[k][i] = abs(u[0, 1]) ** 2
    for m in orders:
        columns[f"u12sq_m{m}"] = approx[m]
    for m in orders:
        columns[f"err_m{m}"] = np.abs(approx[m] - exact)
    return ErrorSweep(
        parameter="eps",
        values=eps_values,
        columns=columns,
        oracle="expm(i(a sz + eps sx))",
        metadata={"a": a, "orders": orders, "nodes": n_nodes,
                  "convergence_bound_marker": WILCOX_BOUND_MARKER},
    )


# ---------------------------------------------------------------------------
# SO(3): exp(alpha(cos th rz + sin th rx)) vs exp(alpha cos th rz) prod exp((alpha sin th)^k W_k)


def so3_generators(alpha: float, theta: float, order: int, n_nodes: int = DEFAULT_NODES) -> list[np.ndarray]:
    ws, _ = wilcox_generators(so3_bellman_operator(alpha, theta), Grid(0.0, 1.0, n_nodes), order)
    return [w[-1] for w in ws]


def so3_approximants(alpha: float, theta: float, generators) -> list[np.ndarray]:
    """Orders 0..len(generators); index = order."""
    eps = alpha * math.sin(theta)
    u = expm(alpha * math.cos(theta) * RHO_Z)
    out = [u]
    for k, w in enumerate(generators, start=1):
        u = u @ expm(eps ** k * w)
        out.append(u)
    return out


def so3_exact_trace(alpha: float) -> float:
    return 1.0 + 2.0 * math.cos(alpha)


def so3_trace_order1(alpha: float, theta: float) -> float:
    """Trace of exp(phi rz) exp(eps W_1), phi = alpha cos th.

    Both factors are rotations about perpendicular axes, by phi and by
    psi = 2 tan(th) sin(phi/2); the product has trace (1+cos phi)(1+cos psi) - 1.
    """
    phi = alpha * math.cos(theta)
    eps = alpha * math.sin(theta)
    psi = eps * _sinc_half(phi)
    return (1 + math.cos(phi)) * (1 + math.cos(psi)) - 1


def so3_trace_order2(alpha: float, theta: float) -> float:
    """Trace after the second factor: W_2 is a z-rotation by chi = eps^2 (phi - sin phi)/(2 phi^2)."""
    phi = alpha * math.cos(theta)
    eps = alpha * math.sin(theta)
    psi = eps * _sinc_half(phi)
    chi = eps ** 2 * _w2_coeff(phi)
    return (1 + math.cos(psi)) * (1 + math.cos(phi + chi)) - 1


def _sinc_half(phi: float) -> float:
    # 2 sin(phi/2) / phi, finite at phi = 0
    return 1.0 if phi == 0 else 2 * math.sin(phi / 2) / phi


def _w2_coeff(phi: float) -> float:
    # (phi - sin phi) / (2 phi^2) ~ phi/12 near zero
    if abs(phi) < 1e-4:
        return phi / 12 - phi ** 3 / 240
    return (phi - math.sin(phi)) / (2 * phi ** 2)


def so3_trace_experiment(alpha: float, theta_values, max_order: int = 5,
                         n_nodes: int = DEFAULT_NODES) -> ErrorSweep:
    theta_values = np.asarray(theta_values, dtype=float)
    exact = so3_exact_trace(alpha)

    def one(theta):
        gens = so3_generators(alpha, float(theta), max_order, n_nodes)
        approx = so3_approximants(alpha, float(theta), gens)
        return [abs(np.trace(u).real - exact) for u in approx[1:]]

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        errs = np.array(list(pool.map(one, theta_values)))
    columns = {f"err_m{m}": errs[:, m - 1] for m in range(1, max_order + 1)}
    return ErrorSweep(
        parameter="theta",
        values=theta_values,
        columns=columns,
        oracle="1 + 2 cos(alpha)",
        metadata={"alpha": alpha, "orders": list(range(1, max_order + 1)), "nodes": n_nodes},
    )


# ---------------------------------------------------------------------------
# Dyson series


def dyson_terms(op, grid: Grid, K: int) -> list[GridSeries]:
    """P_1..P_K with P_k(t) = int_0^t A(s) P_{k-1}(s) ds, P_0 = I."""
    if K < 1:
        raise ValueError("K must be >= 1")
    a = np.asarray(op(grid.nodes), dtype=complex)
    p = np.broadcast_to(np.eye(a.shape[-1], dtype=complex), a.shape)
    out = []
    for _ in range(K):
        p = _cumint_values(a @ p, grid.h)
        out.append(GridSeries(grid, p))
    return out


def dyson_from_wilcox(W, n: int) -> GridSeries:
    """sum over partitions of n of coeff * W_{i_1} ... W_{i_k}, node-wise."""
    grid = W[0].grid
    total = np.zeros_like(W[0].values)
    for parts in partitions(n):
        prod = W[parts[0] - 1].values
        for i in parts[1:]:
            prod = prod @ W[i - 1].values
        total = total + float(partition_coefficient(parts)) * prod
    return GridSeries(grid, total)


def dyson_check(op, grid: Grid, K: int) -> ErrorSweep:
    """Max-entry gap between P_n and its reconstruction from the W_k, per node."""
    P = dyson_terms(op, grid, K)
    ws, _ = wilcox_generators(op, grid, K)
    W = [GridSeries(grid, w) for w in ws]
    columns = {}
    for n in range(1, K + 1):
        gap = np.abs(P[n - 1].values - dyson_from_wilcox(W, n).values)
        columns[f"err_P{n}"] = gap.max(axis=(1, 2))
    return ErrorSweep("t", grid.nodes, columns, oracle="cumulative Dyson recursion",
                      metadata={"nodes": grid.n_nodes, "K": K})


def convergence_summary(N: int = 2000, tail_fraction: float = 0.5):
    table = bound_coefficients(N)
    d_inf, xi = extrapolate_radius(table.d_values, tail_fraction)
    return table, d_inf, xi
