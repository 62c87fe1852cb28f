import itertools
import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import simplex_gauss
from expfact.linalg import CapExceededError
from expfact.operators import su2_bellman_operator
from expfact.permsym import (MAX_DEGREE, NotRepresentableError, WeightedPermSum, comm_to_words,
                             commutators_to_json, dyson_reconstruction, expand_commutators,
                             partition_coefficient, partitions, product_chain,
                             to_commutator_basis, wilcox_weights, word_product)

A = WeightedPermSum.word


def perm_sum(d):
    return WeightedPermSum({tuple(int(c) for c in k): v for k, v in d.items()})


def printed_commutators(d):
    return sorted((tuple(int(c) for c in k), F(v)) for k, v in d.items())


W5_PRINTED = {
    "23451": F(-2, 15), "23541": F(-2, 15), "24351": F(-2, 15), "24531": F(-2, 15),
    "25341": F(-2, 15), "25431": F(-2, 15), "32451": F(1, 5), "32541": F(1, 5),
    "34251": F(-2, 15), "34521": F(-2, 15), "35241": F(-2, 15), "35421": F(-2, 15),
    "42351": F(1, 5), "42531": F(1, 5), "43251": F(1, 5), "43521": F(1, 5),
    "45231": F(-2, 15), "45321": F(-2, 15), "52341": F(1, 5), "52431": F(1, 5),
    "53241": F(1, 5), "53421": F(1, 5), "54231": F(1, 5), "54321": F(1, 5),
}


# words and products


def test_word_validation():
    with pytest.raises(ValueError):
        A(1, 3)
    with pytest.raises(ValueError):
        WeightedPermSum({(1,): 1, (1, 2): 1})
    with pytest.raises(ValueError):
        WeightedPermSum({})


def test_zero_coefficients_dropped():
    s = WeightedPermSum({(1, 2): F(1, 2), (2, 1): 0})
    assert list(s.terms) == [(1, 2)]
    assert len(A(1, 2) - A(1, 2)) == 0


def test_product_single_letters():
    assert A(1) * A(1) == perm_sum({"12": 1, "21": 1})


def test_product_letter_times_pair():
    assert A(1) * A(1, 2) == perm_sum({"123": 1, "213": 1, "312": 1})


def test_product_letter_times_triple():
    assert A(1) * A(1, 2, 3) == perm_sum({"4123": 1, "3124": 1, "2134": 1, "1234": 1})


def test_product_degree_mismatch_in_sum():
    with pytest.raises(ValueError):
        A(1) + A(1, 2)


def words_of(n):
    return st.permutations(list(range(1, n + 1))).map(tuple)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3).flatmap(words_of), st.integers(1, 3).flatmap(words_of),
       st.integers(1, 2).flatmap(words_of))
def test_product_associative(u, v, w):
    u, v, w = A(*u), A(*v), A(*w)
    assert (u * v) * w == u * (v * w)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4).flatmap(words_of), st.integers(1, 4).flatmap(words_of))
def test_product_total_multiplicative(u, v):
    p, q = len(u), len(v)
    assert (A(*u) * A(*v)).total() == math.comb(p + q, p)


def test_product_matches_numeric_iterated_integrals():
    # A(12) * A(1) against nested quadrature with t-dependent 2x2 matrices
    rng = np.random.default_rng(0)
    m0, m1 = rng.normal(size=(2, 2, 2))

    def a(t):
        t = np.asarray(t)
        return np.cos(t)[..., None, None] * m0 + t[..., None, None] * m1

    def integral(word, t=1.0):
        pts, wts = simplex_gauss(len(word), t, 14)
        prod = a(pts[:, word[0] - 1])
        for letter in word[1:]:
            prod = prod @ a(pts[:, letter - 1])
        return np.einsum("m,mij->ij", wts, prod)

    lhs = integral((1, 2)) @ integral((1,))
    rhs = sum(float(c) * integral(w) for w, c in (A(1, 2) * A(1)).items())
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


# partitions


def brute_force_partitions(n):
    out = set()
    for cuts in itertools.product([0, 1], repeat=n - 1):
        parts, run = [], 1
        for c in cuts:
            if c:
                parts.append(run)
                run = 1
            else:
                run += 1
        parts.append(run)
        out.add(tuple(sorted(parts)))
    return out


def test_partitions_of_one():
    assert partitions(1) == [(1,)]


def test_partitions_of_five_listing():
    assert partitions(5) == [(5,), (1, 4), (2, 3), (1, 1, 3), (1, 2, 2), (1, 1, 1, 2), (1, 1, 1, 1, 1)]


@pytest.mark.parametrize("n", range(1, 11))
def test_partitions_match_brute_force(n):
    got = partitions(n)
    assert len(got) == len(set(got))
    assert set(got) == brute_force_partitions(n)


def test_partitions_of_eight_count():
    assert len(partitions(8)) == 22


def test_partitions_rejects_zero():
    with pytest.raises(ValueError):
        partitions(0)


@pytest.mark.parametrize("parts,coef", [((4,), F(1)), ((1, 3), F(1)), ((1, 1, 2), F(1, 2)),
                                        ((2, 2), F(1, 2)), ((1, 1, 1, 1), F(1, 24)),
                                        ((1, 1, 2, 2), F(1, 4))])
def test_partition_coefficient(parts, coef):
    assert partition_coefficient(parts) == coef


# Wilcox weights


def test_first_weight():
    assert wilcox_weights(1) == A(1)


def test_second_weight():
    assert wilcox_weights(2) == perm_sum({"12": F(1, 2), "21": F(-1, 2)})


def test_third_weight():
    expected = perm_sum({"123": F(1, 3), "132": F(1, 3), "213": F(-2, 3),
                         "231": F(1, 3), "312": F(-2, 3), "321": F(1, 3)})
    assert wilcox_weights(3) == expected


def test_third_weight_from_products():
    # W_3 = P_3 - P_1 P_2 + 1/3 P_1^3
    p1 = A(1)
    assert wilcox_weights(3) == A(1, 2, 3) - p1 * A(1, 2) + F(1, 3) * product_chain([p1, p1, p1])


@pytest.mark.parametrize("n", range(2, 8))
def test_weights_sum_to_zero(n):
    assert wilcox_weights(n).total() == 0


def test_weights_degree_eight_at_cap():
    w = wilcox_weights(MAX_DEGREE)
    assert w.degree == 8 and w.total() == 0


def test_weights_cap_and_domain():
    with pytest.raises(CapExceededError):
        wilcox_weights(MAX_DEGREE + 1)
    with pytest.raises(ValueError):
        wilcox_weights(0)


@pytest.mark.parametrize("n", range(1, 7))
def test_dyson_reconstruction_exact(n):
    assert dyson_reconstruction(n) == WeightedPermSum.identity(n)


def test_fourth_dyson_term_display():
    # P_4 = W_4 + W_1 W_3 + 1/2 W_1^2 W_2 + 1/2 W_2^2 + 1/4! W_1^4
    w = {k: wilcox_weights(k) for k in range(1, 5)}
    total = (w[4] + w[1] * w[3] + F(1, 2) * product_chain([w[1], w[1], w[2]])
             + F(1, 2) * (w[2] * w[2]) + F(1, 24) * product_chain([w[1]] * 4))
    assert total == A(1, 2, 3, 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_weights_against_numeric_expansion(su2_fine, n):
    _, W = su2_fine
    op = su2_bellman_operator(1.0)
    pts, wts = simplex_gauss(n, 1.0, 14)
    mats = [op(pts[:, i]) for i in range(n)]
    total = np.zeros((2, 2), dtype=complex)
    for word, coef in wilcox_weights(n).items():
        prod = mats[word[0] - 1]
        for letter in word[1:]:
            prod = prod @ mats[letter - 1]
        total += float(coef) * np.einsum("m,mij->ij", wts, prod)
    assert np.max(np.abs(total - W[n - 1][-1])) < 1e-5


# commutator form


def test_comm_to_words_pair():
    assert comm_to_words((2, 1)) == perm_sum({"21": 1, "12": -1})


def test_comm_to_words_matches_nested_brackets():
    rng = np.random.default_rng(3)
    for letters in itertools.permutations((1, 2, 3, 4)):
        mats = rng.normal(size=(4, 3, 3))
        nested = mats[letters[-1] - 1]
        for i in reversed(letters[:-1]):
            nested = mats[i - 1] @ nested - nested @ mats[i - 1]
        words = comm_to_words(letters)
        assert len(words) == 8
        total = sum(float(c) * np.linalg.multi_dot([mats[i - 1] for i in w]) for w, c in words.items())
        np.testing.assert_allclose(total, nested, atol=1e-12)


def test_comm_to_words_231():
    assert comm_to_words((2, 3, 1)) == perm_sum({"231": 1, "213": -1, "312": -1, "132": 1})


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6).flatmap(words_of))
def test_comm_to_words_total_zero(letters):
    assert comm_to_words(letters).total() == 0


def test_second_weight_commutator_form():
    assert to_commutator_basis(wilcox_weights(2)) == [((2, 1), F(-1, 2))]


def test_third_weight_commutator_form():
    assert to_commutator_basis(wilcox_weights(3)) == printed_commutators({"231": F(1, 3), "321": F(1, 3)})


def test_fourth_weight_commutator_form():
    expected = printed_commutators({"3241": F(-1, 4), "4231": F(-1, 4), "4321": F(-1, 4)})
    assert to_commutator_basis(wilcox_weights(4)) == expected


def test_fifth_weight_commutator_form():
    assert to_commutator_basis(wilcox_weights(5)) == printed_commutators(W5_PRINTED)


@pytest.mark.parametrize("n", range(2, 7))
def test_commutator_form_size_bound(n):
    assert len(to_commutator_basis(wilcox_weights(n))) <= math.factorial(n - 1)


@pytest.mark.parametrize("n", range(2, 6))
def test_round_trip_every_fixed_label(n):
    w = wilcox_weights(n)
    for f in range(1, n + 1):
        pairs = to_commutator_basis(w, f)
        assert all(word[-1] == f for word, _ in pairs)
        assert expand_commutators(pairs, n) == w


def test_non_lie_element_rejected():
    with pytest.raises(NotRepresentableError):
        to_commutator_basis(A(1, 2))


def test_commutator_form_argument_checks():
    with pytest.raises(ValueError):
        to_commutator_basis(wilcox_weights(1))
    with pytest.raises(ValueError):
        to_commutator_basis(wilcox_weights(3), 4)


# serialization


def test_json_round_trip():
    w = wilcox_weights(4)
    doc = json.loads(json.dumps(w.to_json()))
    assert doc["degree"] == 4
    assert WeightedPermSum.from_json(doc) == w


def test_json_is_sorted_and_reduced():
    doc = wilcox_weights(3).to_json()
    words = [tuple(t["word"]) for t in doc["terms"]]
    assert words == sorted(words)
    assert all(math.gcd(t["num"], t["den"]) == 1 and t["den"] > 0 for t in doc["terms"])


def test_commutator_json():
    doc = commutators_to_json(to_commutator_basis(wilcox_weights(2)), 2, 1)
    assert doc == {"degree": 2, "fixed_last": 1, "terms": [{"word": [2, 1], "num": -1, "den": 2}]}
