"""Zassenhaus terms and the Bellman product expansion of exp(A + eps B).

Symbolic terms live in the free associative algebra on two letters with an
explicit power of t attached to each word; commutators are always expanded
to words, so equality is coefficient comparison.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .linalg import CapExceededError, as_matrix, expm
from .operators import ConjugatedOperator, Grid
from .wilcox import wilcox_generators

MAX_ORDER = 8
ALPHABET = ("X", "Y")

Key = tuple[str, int]


class NcPolynomial:
    """Rational combination of (word over {X, Y}, power of t) pairs."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, Fraction | int] | None = None):
        clean: dict[Key, Fraction] = {}
        for (word, tp), coef in (terms or {}).items():
            if any(ch not in ALPHABET for ch in word):
                raise ValueError(f"word {word!r} uses letters outside {ALPHABET}")
            if tp < 0:
                raise ValueError("t power must be nonnegative")
            c = Fraction(coef)
            clean[(word, int(tp))] = clean.get((word, int(tp)), 0) + c
        self._terms = dict(sorted((k, c) for k, c in clean.items() if c))

    @classmethod
    def letter(cls, ch: str, t_power: int = 0) -> "NcPolynomial":
        return cls({(ch, t_power): 1})

    @classmethod
    def zero(cls) -> "NcPolynomial":
        return cls()

    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __add__(self, other: "NcPolynomial") -> "NcPolynomial":
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return NcPolynomial(out)

    def __neg__(self):
        return NcPolynomial({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        s = Fraction(scalar)
        return NcPolynomial({k: s * c for k, c in self._terms.items()})

    def __matmul__(self, other: "NcPolynomial") -> "NcPolynomial":
        out: dict[Key, Fraction] = {}
        for (w1, p1), c1 in self._terms.items():
            for (w2, p2), c2 in other._terms.items():
                k = (w1 + w2, p1 + p2)
                out[k] = out.get(k, 0) + c1 * c2
        return NcPolynomial(out)

    def __eq__(self, other):
        if not isinstance(other, NcPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self):
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*t^{p}*{w}" for (w, p), c in self._terms.items())

    def integrate(self) -> "NcPolynomial":
        """Antiderivative in t vanishing at t = 0."""
        return NcPolynomial({(w, p + 1): c / (p + 1) for (w, p), c in self._terms.items()})

    def at_t(self, t: Fraction | int = 1) -> "NcPolynomial":
        """Substitute a rational t, leaving t-free words."""
        t = Fraction(t)
        out: dict[Key, Fraction] = {}
        for (w, p), c in self._terms.items():
            out[(w, 0)] = out.get((w, 0), 0) + c * t ** p
        return NcPolynomial(out)

    def is_homogeneous(self, n: int) -> bool:
        return all(len(w) == n and p == n for (w, p) in self._terms)

    def evaluate(self, x, y, t: float = 1.0) -> np.ndarray:
        """Substitute matrices for the letters and a number for t."""
        mats = {"X": as_matrix(x), "Y": as_matrix(y)}
        d = mats["X"].shape[0]
        out = np.zeros((d, d), dtype=complex)
        cache: dict[str, np.ndarray] = {"": np.eye(d, dtype=complex)}

        def word_matrix(w: str) -> np.ndarray:
            if w not in cache:
                cache[w] = word_matrix(w[:-1]) @ mats[w[-1]]
            return cache[w]

        for (w, p), c in self._terms.items():
            out += float(c) * t ** p * word_matrix(w)
        return out

    def to_json(self) -> dict:
        return {"terms": [{"word": w, "t_power": p, "num": c.numerator, "den": c.denominator}
                          for (w, p), c in self._terms.items()]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "NcPolynomial":
        return cls({(t["word"], int(t["t_power"])): Fraction(t["num"], t["den"]) for t in doc["terms"]})


def commutator(a: NcPolynomial, b: NcPolynomial) -> NcPolynomial:
    return a @ b - b @ a


def ad_pow(a: NcPolynomial, b: NcPolynomial, k: int) -> NcPolynomial:
    for _ in range(k):
        b = commutator(a, b)
    return b


def nested(*factors: NcPolynomial) -> NcPolynomial:
    """[f_1, [f_2, ... [f_{k-1}, f_k] ...]]."""
    out = factors[-1]
    for f in reversed(factors[:-1]):
        out = commutator(f, out)
    return out


X = NcPolynomial.letter("X")
Y = NcPolynomial.letter("Y")


def zassenhaus_terms(N: int, *, max_order: int = MAX_ORDER) -> list[NcPolynomial]:
    """W_1(t) .. W_N(t) with exp(t(X+Y)) = exp(tX) exp(W_1) exp(W_2) ...

    Seeded by b_{0,l} = (-1)^(l-1) t^(l-1) ad_X^(l-1) Y / (l-1)!; then
    b_{n,l} = sum_{k=0}^{floor((l-1)/n)-1} (-1)^k/k! ad_{W_n}^k b_{n-1,l-nk}
    and W_n' = b_{n-2,n} (W_1' = Y).  C_n(X, Y) is W_n at t = 1.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > max_order:
        raise CapExceededError(f"order {N} exceeds the cap {max_order}")
    levels: list[dict[int, NcPolynomial]] = []
    b0: dict[int, NcPolynomial] = {}
    term = Y
    for l in range(1, N + 1):
        if l > 1:
            term = commutator(X, term)
        b0[l] = Fraction((-1) ** (l - 1), math.factorial(l - 1)) * NcPolynomial(
            {(w, p + l - 1): c for (w, p), c in term.items()})
    levels.append(b0)

    ws: list[NcPolynomial] = []
    for n in range(1, N + 1):
        wdot = b0[1] if n == 1 else levels[n - 2].get(n, NcPolynomial.zero())
        w = wdot.integrate()
        ws.append(w)
        if n == N:
            break
        prev = levels[n - 1]
        cur: dict[int, NcPolynomial] = {}
        for l in range(n + 1, N + 1):
            acc = NcPolynomial.zero()
            for k in range((l - 1) // n):
                src = prev.get(l - n * k)
                if not src:
                    continue
                acc = acc + Fraction((-1) ** k, math.factorial(k)) * ad_pow(w, src, k)
            cur[l] = acc
        levels.append(cur)
    return ws


def bellman_c1_series(K: int) -> NcPolynomial:
    """sum_{k=0}^{K} (-1)^k ad_A^k B / (k+1)!, with A -> X and B -> Y."""
    if K < 0:
        raise ValueError("K must be >= 0")
    out = NcPolynomial.zero()
    term = Y
    for k in range(K + 1):
        if k:
            term = commutator(X, term)
        out = out + Fraction((-1) ** k, math.factorial(k + 1)) * term
    return out


def bellman_generators(a, b, N: int, grid: Grid, *, max_order: int = 12) -> list[np.ndarray]:
    """W_1(1) .. W_N(1) for dV/dt = eps expm(-tA) B expm(tA) V."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if grid.t0 != 0 or grid.t1 != 1:
        raise ValueError("Bellman grid must span [0, 1]")
    ws, _ = wilcox_generators(ConjugatedOperator(a, b), grid, N, max_order=max_order)
    return [w[-1] for w in ws]


def bellman_approximants(a, eps: float, generators: Iterable[np.ndarray]) -> list[np.ndarray]:
    """[expm(A), expm(A) expm(eps W_1), expm(A) expm(eps W_1) expm(eps^2 W_2), ...]."""
    u = expm(as_matrix(a))
    out = [u]
    for k, w in enumerate(generators, start=1):
        u = u @ expm(eps ** k * w)
        out.append(u)
    return out


def bellman_numeric(a, b, eps: float, N: int, grid: Grid) -> tuple[list[np.ndarray], np.ndarray]:
    """Approximants of orders 0..N (index = order) and expm(A + eps B)."""
    gens = bellman_generators(a, b, N, grid)
    approx = bellman_approximants(a, eps, gens)
    exact = expm(as_matrix(a) + eps * as_matrix(b))
    return approx, exact
