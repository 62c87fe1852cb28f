"""Wilcox product expansion computed numerically on a uniform grid.

The solution of dx/dt = lambda A(t) x is factored as
exp(lambda W_1) exp(lambda^2 W_2) ... with each W_n independent of lambda.
Bookkeeping follows the transformation recursion: the residual generator
after n transformations is sum_l lambda^l b_{n,l}, and

    c_{n,r} = b_{n-1,r} - g_{n,r},   g_{n,nl} = ad_{W_n}^{l-1} W_n' / l!
    W_n'    = b_{n-1,n}
    b_{n,l} = sum_{k=0}^{floor((l-1)/n)-1} (-1)^k / k! ad_{W_n}^k c_{n,l-nk}

All values at a node depend only on A and the W_m at the same node, so the
recursion is evaluated one level at a time over the whole grid (vectorised)
with trapezoid accumulation of each W_n.  This gives the same numbers as a
node-by-node sweep.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import CapExceededError, expm
from .operators import Grid, GridSeries, _cumint_values

MAX_ORDER = 12


def _ad(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def wilcox_generators(op, grid: Grid, order: int, *, max_order: int = MAX_ORDER):
    """Return ``(W, Wdot)``: lists of node-value stacks for W_1..W_order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if order > max_order:
        raise CapExceededError(f"order {order} exceeds the cap {max_order}")
    h = grid.h
    a = np.asarray(op(grid.nodes), dtype=complex)
    # b_{n-1,l} for the current level; None marks an identically zero coefficient
    b_prev: dict[int, np.ndarray | None] = {1: a}
    ws, wdots = [], []
    for n in range(1, order + 1):
        wdot = b_prev.get(n)
        if wdot is None:
            wdot = np.zeros_like(a)
        w = _cumint_values(wdot, h)
        ws.append(w)
        wdots.append(wdot)
        if n == order:
            break

        g: dict[int, np.ndarray] = {}
        term = wdot
        for l in range(1, order // n + 1):
            if l > 1:
                term = _ad(w, term)
            g[n * l] = term / math.factorial(l)

        c: dict[int, np.ndarray | None] = {}
        for r in range(n + 1, order + 1):
            br, gr = b_prev.get(r), g.get(r)
            if br is None and gr is None:
                c[r] = None
            elif gr is None:
                c[r] = br
            elif br is None:
                c[r] = -gr
            else:
                c[r] = br - gr

        # ad_{W_n}^k c_{n,r}, built incrementally in k
        ad_cache: dict[tuple[int, int], np.ndarray | None] = {}

        def ad_c(k: int, r: int):
            key = (k, r)
            if key not in ad_cache:
                if k == 0:
                    ad_cache[key] = c.get(r)
                else:
                    prev = ad_c(k - 1, r)
                    ad_cache[key] = None if prev is None else _ad(w, prev)
            return ad_cache[key]

        b_next: dict[int, np.ndarray | None] = {}
        for l in range(n + 1, order + 1):
            acc = None
            for k in range((l - 1) // n):
                v = ad_c(k, l - n * k)
                if v is None:
                    continue
                v = v * ((-1) ** k / math.factorial(k))
                acc = v if acc is None else acc + v
            b_next[l] = acc
        b_prev = b_next
    return ws, wdots


def wilcox_terms(op, grid: Grid, order: int, *, max_order: int = MAX_ORDER) -> list[GridSeries]:
    """W_1..W_order sampled on ``grid`` (W_n(t0) = 0)."""
    ws, _ = wilcox_generators(op, grid, order, max_order=max_order)
    return [GridSeries(grid, w) for w in ws]


def wilcox_propagator(W, t_index: int, lam: float, n_terms: int) -> np.ndarray:
    """expm(lam W_1(t)) expm(lam^2 W_2(t)) ... expm(lam^m W_m(t)) at one node."""
    if n_terms > len(W):
        raise ValueError(f"requested {n_terms} factors but only {len(W)} terms are available")
    if n_terms < 0:
        raise ValueError("n_terms must be nonnegative")
    if W:
        n_nodes = len(W[0].values)
        if not -n_nodes <= t_index < n_nodes:
            raise IndexError(f"node index {t_index} outside grid of {n_nodes} nodes")
        d = W[0].dim
    else:
        if n_terms:
            raise ValueError("no terms available")
        return np.eye(1, dtype=complex)
    return product_of_exponentials([W[k][t_index] for k in range(n_terms)], lam, d)


def product_of_exponentials(mats, lam: float, dim: int | None = None) -> np.ndarray:
    """prod_k expm(lam^k M_k), k starting at 1."""
    if dim is None:
        dim = mats[0].shape[-1]
    out = np.eye(dim, dtype=complex)
    for k, m in enumerate(mats, start=1):
        out = out @ expm(lam ** k * m)
    return out
