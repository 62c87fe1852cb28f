"""Exact-rational algebra of permutation words for iterated integrals.

A word (i_1 ... i_n) stands for the simplex integral
int_{t >= t_1 >= ... >= t_n >= 0} A(t_{i_1}) ... A(t_{i_n}); products of such
integrals expand into sums of words by merging the two time orderings.  The
Wilcox exponents W_n are obtained by inverting the relation between the Dyson
terms P_n = (1 2 ... n) and products of the W_k, then rewritten in a basis of
right-nested commutators with a fixed rightmost letter.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Mapping

from .linalg import CapExceededError

MAX_DEGREE = 8

Word = tuple[int, ...]


class NotRepresentableError(ValueError):
    """The sum is not a Lie element, so it has no commutator-basis form."""


def _check_word(word: Iterable[int]) -> Word:
    w = tuple(int(i) for i in word)
    if sorted(w) != list(range(1, len(w) + 1)):
        raise ValueError(f"{w} is not a permutation of 1..{len(w)}")
    return w


class WeightedPermSum:
    """Rational combination of permutation words of one degree."""

    __slots__ = ("degree", "_terms")

    def __init__(self, terms: Mapping[Word, Fraction | int] | None = None, degree: int | None = None):
        clean: dict[Word, Fraction] = {}
        for word, coef in (terms or {}).items():
            w = _check_word(word)
            c = Fraction(coef)
            if c:
                clean[w] = clean.get(w, Fraction(0)) + c
        clean = {w: c for w, c in clean.items() if c}
        degrees = {len(w) for w in clean}
        if len(degrees) > 1:
            raise ValueError(f"mixed degrees {sorted(degrees)}")
        if degree is None:
            if not degrees:
                raise ValueError("degree is required for an empty sum")
            degree = degrees.pop()
        elif degrees and degrees != {degree}:
            raise ValueError(f"terms have degree {degrees.pop()}, expected {degree}")
        self.degree = degree
        self._terms = dict(sorted(clean.items()))

    @classmethod
    def _trusted(cls, terms: dict[Word, Fraction], degree: int) -> "WeightedPermSum":
        # internal fast path: words already valid, coefficients Fractions
        obj = cls.__new__(cls)
        obj.degree = degree
        obj._terms = dict(sorted((w, c) for w, c in terms.items() if c))
        return obj

    @classmethod
    def word(cls, *letters: int) -> "WeightedPermSum":
        return cls({tuple(letters): 1})

    @classmethod
    def identity(cls, n: int) -> "WeightedPermSum":
        return cls({tuple(range(1, n + 1)): 1})

    @property
    def terms(self) -> dict[Word, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __getitem__(self, word) -> Fraction:
        return self._terms.get(tuple(word), Fraction(0))

    def total(self) -> Fraction:
        return sum(self._terms.values(), Fraction(0))

    def _check_same(self, other: "WeightedPermSum"):
        if not isinstance(other, WeightedPermSum):
            return NotImplemented
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other):
        self._check_same(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0) + c
        return WeightedPermSum._trusted(out, self.degree)

    def __neg__(self):
        return WeightedPermSum._trusted({w: -c for w, c in self._terms.items()}, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        s = Fraction(scalar)
        return WeightedPermSum._trusted({w: s * c for w, c in self._terms.items()}, self.degree)

    def __mul__(self, other):
        if isinstance(other, WeightedPermSum):
            return word_product(self, other)
        return self.__rmul__(other)

    def __eq__(self, other):
        if not isinstance(other, WeightedPermSum):
            return NotImplemented
        return self.degree == other.degree and self._terms == other._terms

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = [f"{c}*A({''.join(map(str, w))})" for w, c in self._terms.items()]
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "terms": [{"word": list(w), "num": c.numerator, "den": c.denominator}
                      for w, c in self._terms.items()],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "WeightedPermSum":
        return cls({tuple(t["word"]): Fraction(t["num"], t["den"]) for t in doc["terms"]},
                   int(doc["degree"]))


@lru_cache(maxsize=None)
def _merge_labels(p: int, q: int) -> tuple[tuple[Word, Word], ...]:
    """For each p-subset S of 1..p+q: (S ascending, complement ascending)."""
    full = range(1, p + q + 1)
    out = []
    for s in itertools.combinations(full, p):
        sset = set(s)
        out.append((s, tuple(i for i in full if i not in sset)))
    return tuple(out)


def word_product(u: WeightedPermSum, v: WeightedPermSum) -> WeightedPermSum:
    """Product of iterated integrals expressed again as permutation words.

    A word u of degree p times a word v of degree q gives the sum over all
    p-subsets S of {1..p+q} of u relabelled increasingly onto S followed by v
    relabelled increasingly onto the complement of S.
    """
    p, q = u.degree, v.degree
    out: dict[Word, Fraction] = {}
    v_items = list(v.items())
    for s, comp in _merge_labels(p, q):
        rights = [(tuple(comp[i - 1] for i in wv), cv) for wv, cv in v_items]
        for wu, cu in u.items():
            left = tuple(s[i - 1] for i in wu)
            for right, cv in rights:
                w = left + right
                out[w] = out.get(w, 0) + cu * cv
    return WeightedPermSum._trusted(out, p + q)


def partitions(n: int) -> list[tuple[int, ...]]:
    """Partitions of n with nondecreasing parts, ordered by length then lexicographically."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def gen(rest: int, smallest: int):
        if rest == 0:
            yield ()
            return
        for first in range(smallest, rest + 1):
            for tail in gen(rest - first, first):
                yield (first,) + tail

    return sorted(gen(n, 1), key=lambda p: (len(p), p))


def partition_coefficient(parts: tuple[int, ...]) -> Fraction:
    """prod over distinct part values of 1/(multiplicity)!."""
    coef = Fraction(1)
    for _, group in itertools.groupby(parts):
        coef /= math.factorial(len(list(group)))
    return coef


def product_chain(factors: list[WeightedPermSum]) -> WeightedPermSum:
    return reduce(word_product, factors)


@lru_cache(maxsize=None)
def _wilcox_chain(parts: tuple[int, ...]) -> WeightedPermSum:
    # W_{i_1} ... W_{i_k}, memoised on prefixes shared between partitions
    if len(parts) == 1:
        return _wilcox_weights_cached(parts[0])
    return word_product(_wilcox_chain(parts[:-1]), _wilcox_weights_cached(parts[-1]))


@lru_cache(maxsize=None)
def _wilcox_weights_cached(n: int) -> WeightedPermSum:
    if n == 1:
        return WeightedPermSum.identity(1)
    acc: dict[Word, Fraction] = {tuple(range(1, n + 1)): Fraction(1)}
    for parts in partitions(n):
        if len(parts) < 2:
            continue
        coef = partition_coefficient(parts)
        for word, c in _wilcox_chain(parts).items():
            acc[word] = acc.get(word, 0) - coef * c
    return WeightedPermSum._trusted(acc, n)


def wilcox_weights(n: int, *, max_degree: int = MAX_DEGREE) -> WeightedPermSum:
    """W_n as a rational combination of the n! permutation words."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > max_degree:
        raise CapExceededError(f"degree {n} exceeds the cap {max_degree}")
    return _wilcox_weights_cached(n)


def dyson_reconstruction(n: int) -> WeightedPermSum:
    """sum over partitions of n of coeff * W_{i_1} ... W_{i_k}; equals P_n."""
    total = WeightedPermSum({}, n)
    for parts in partitions(n):
        if max(parts) < n:
            wilcox_weights(max(parts))
        total = total + partition_coefficient(parts) * (
            _wilcox_chain(parts) if len(parts) > 1 else wilcox_weights(n))
    return total


def comm_to_words(letters: Iterable[int]) -> WeightedPermSum:
    """Expand [x_{i1}, [x_{i2}, ... [x_{i(n-1)}, x_{in}] ...]] into signed words."""
    cw = _check_word(letters)
    if len(cw) < 2:
        raise ValueError("a commutator word needs at least two letters")
    expansion: dict[Word, int] = {(cw[-1],): 1}
    for a in reversed(cw[:-1]):
        nxt: dict[Word, int] = {}
        for w, c in expansion.items():
            nxt[(a,) + w] = nxt.get((a,) + w, 0) + c
            nxt[w + (a,)] = nxt.get(w + (a,), 0) - c
        expansion = nxt
    return WeightedPermSum(expansion, len(cw))


def expand_commutators(pairs: Iterable[tuple[Word, Fraction]], degree: int) -> WeightedPermSum:
    total = WeightedPermSum({}, degree)
    for cw, coef in pairs:
        total = total + coef * comm_to_words(cw)
    return total


def to_commutator_basis(w: WeightedPermSum, fixed_last: int = 1) -> list[tuple[Word, Fraction]]:
    """Rewrite a Lie element in right-nested commutators ending in ``fixed_last``.

    The coefficient of A[s_1 ... s_{n-1} f] is the coefficient of the word
    (s_1 ... s_{n-1} f) in ``w``: in the expansion of a right-nested bracket the
    only word ending in its last letter is the bracket's own letter sequence.
    The result is expanded back and compared with ``w``.
    """
    n = w.degree
    if n < 2:
        raise ValueError("commutator form needs degree >= 2")
    if not 1 <= fixed_last <= n:
        raise ValueError(f"fixed_last must be in 1..{n}")
    pairs = [(word, c) for word, c in w.items() if word[-1] == fixed_last]
    if expand_commutators(pairs, n) != w:
        raise NotRepresentableError("input is not a combination of nested commutators")
    return pairs


def commutators_to_json(pairs, degree: int, fixed_last: int) -> dict:
    return {
        "degree": degree,
        "fixed_last": fixed_last,
        "terms": [{"word": list(cw), "num": c.numerator, "den": c.denominator} for cw, c in pairs],
    }
