import math

import numpy as np
import pytest

from conftest import fitted_slope, su2_exact_interaction
from expfact.fer import fer_terms
from expfact.linalg import (RHO_X, RHO_Y, SIGMA_Z, CapExceededError, ad_pow, expm,
                            is_skew_hermitian, is_unitary)
from expfact.operators import (Grid, OperatorFunction, ScalarFunction, so3_bellman_operator,
                               su2_bellman_operator)
from expfact.wilcox import (MAX_ORDER, product_of_exponentials, wilcox_generators,
                            wilcox_propagator, wilcox_terms)


def _ad(x, y):
    return x @ y - y @ x


def test_constant_operator_single_factor():
    m = np.array([[0.2, 1.0], [-0.7j, 0.4]])
    grid = Grid(0.0, 2.0, 41)
    W = wilcox_terms(OperatorFunction.constant(m), grid, 5)
    np.testing.assert_allclose(W[0].values, grid.nodes[:, None, None] * m, atol=1e-14)
    for w in W[1:]:
        assert np.max(np.abs(w.values)) < 1e-14


def test_all_terms_vanish_at_start():
    W = wilcox_terms(su2_bellman_operator(0.7), Grid(0.0, 1.0, 101), 8)
    for w in W:
        assert not w[0].any()


def test_low_order_generators_match_closed_rates():
    # W_2' = -1/2 ad_{W1} A, W_3' = 1/3 ad_{W1}^2 A,
    # W_4' = -1/8 ad_{W1}^3 A - 1/2 ad_{W2} W_2', W_5' = 1/30 ad_{W1}^4 A - ad_{W2} W_3'
    op = so3_bellman_operator(1.3, 0.4)
    ws, wd = wilcox_generators(op, Grid(0.0, 1.0, 401), 5)
    a = op(Grid(0.0, 1.0, 401).nodes)
    w1, w2 = ws[0], ws[1]
    np.testing.assert_allclose(wd[0], a)
    np.testing.assert_allclose(wd[1], -0.5 * _ad(w1, a), atol=1e-14)
    np.testing.assert_allclose(wd[2], ad_pow(w1, a, 2) / 3, atol=1e-14)
    np.testing.assert_allclose(wd[3], -ad_pow(w1, a, 3) / 8 - 0.5 * _ad(w2, wd[1]), atol=1e-14)
    np.testing.assert_allclose(wd[4], ad_pow(w1, a, 4) / 30 - _ad(w2, wd[2]), atol=1e-14)


def test_second_term_su2_value(su2_fine):
    # i (2 - sin 2) sz / 4 at t = 1 for a = 1
    _, W = su2_fine
    expected = 1j * (2 - math.sin(2.0)) / 4 * SIGMA_Z
    assert np.max(np.abs(W[1][-1] - expected)) < 1e-9


def test_skew_hermitian_terms(su2_fine):
    _, W = su2_fine
    for w in W:
        assert is_skew_hermitian(w.values, 1e-10)


def test_first_term_equals_fer_first_exponent():
    grid = Grid(0.0, 1.0, 2001)
    op = so3_bellman_operator(2.0, 0.7)
    W = wilcox_terms(op, grid, 1)
    omegas, _ = fer_terms(op, grid, 1)
    assert np.max(np.abs(W[0].values - omegas[0].values)) <= 1e-14


def test_grid_refinement_second_order():
    op = su2_bellman_operator(1.0)
    coarse = [w[-1] for w in wilcox_generators(op, Grid(0.0, 1.0, 201), 4)[0]]
    mid = [w[-1] for w in wilcox_generators(op, Grid(0.0, 1.0, 401), 4)[0]]
    fine = [w[-1] for w in wilcox_generators(op, Grid(0.0, 1.0, 801), 4)[0]]
    for c, m, f in zip(coarse, mid, fine):
        ratio = np.max(np.abs(c - m)) / np.max(np.abs(m - f))
        assert 3.7 < ratio < 4.3


def test_propagator_empty_product_is_identity(su2_fine):
    _, W = su2_fine
    np.testing.assert_array_equal(wilcox_propagator(W, -1, 0.3, 0), np.eye(2))


def test_propagator_constant_operator():
    m = np.array([[0.0, 1.0], [-2.0, 0.3]])
    grid = Grid(0.0, 1.5, 31)
    W = wilcox_terms(OperatorFunction.constant(m), grid, 4)
    for n_terms in (1, 2, 4):
        np.testing.assert_allclose(wilcox_propagator(W, -1, 1.0, n_terms), expm(1.5 * m), atol=1e-13)


def test_propagator_local_order_fifth(su2_fine):
    _, W = su2_fine
    e1 = np.linalg.norm(wilcox_propagator(W, -1, 0.2, 5) - su2_exact_interaction(1.0, 0.2))
    e2 = np.linalg.norm(wilcox_propagator(W, -1, 0.1, 5) - su2_exact_interaction(1.0, 0.1))
    assert math.log2(e1 / e2) >= 5.8
    assert e1 < 0.2 ** 6


@pytest.mark.parametrize("m", [1, 2, 3])
def test_order_of_accuracy_small_lambda(su2_fine, m):
    # the finest window is usable only while the error stays above the quadrature floor
    _, W = su2_fine
    lams = 2.0 ** -np.arange(3, 9)
    errs = [np.linalg.norm(wilcox_propagator(W, -1, lam, m) - su2_exact_interaction(1.0, lam))
            for lam in lams]
    assert abs(fitted_slope(lams, errs) - (m + 1)) <= 0.2


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_truncated_products_are_unitary(su2_fine, m):
    grid, W = su2_fine
    for lam in (0.1, 0.5, 1.0):
        for idx in (1, grid.n_nodes // 2, -1):
            assert is_unitary(wilcox_propagator(W, idx, lam, m), 1e-10)


def test_orthogonal_products_for_rotations():
    W = wilcox_terms(so3_bellman_operator(math.pi, 0.5), Grid(0.0, 1.0, 2001), 5)
    for m in range(1, 6):
        u = wilcox_propagator(W, -1, math.pi * math.sin(0.5), m)
        assert np.max(np.abs(u.imag)) == 0.0
        assert is_unitary(u, 1e-10)
        assert np.linalg.det(u).real == pytest.approx(1.0, abs=1e-10)


def test_product_of_exponentials_order():
    mats = [RHO_X, RHO_Y]
    np.testing.assert_allclose(product_of_exponentials(mats, 0.5),
                               expm(0.5 * RHO_X) @ expm(0.25 * RHO_Y))


def test_rejects_bad_order():
    op = su2_bellman_operator(1.0)
    with pytest.raises(ValueError):
        wilcox_terms(op, Grid(0.0, 1.0, 11), 0)
    with pytest.raises(CapExceededError):
        wilcox_terms(op, Grid(0.0, 1.0, 11), MAX_ORDER + 1)


def test_propagator_rejects_bad_requests(su2_fine):
    grid, W = su2_fine
    with pytest.raises(ValueError):
        wilcox_propagator(W, -1, 0.1, len(W) + 1)
    with pytest.raises(IndexError):
        wilcox_propagator(W, grid.n_nodes, 0.1, 1)


def test_time_dependent_coefficient_catalog():
    # A(t) = t^2 rx + exp(-t) ry at lambda = 1/2, inside the convergence region
    op = OperatorFunction(((ScalarFunction("power", {"k": 2}), RHO_X),
                           (ScalarFunction("exp", {"a": -1.0}), RHO_Y)))
    grid = Grid(0.0, 1.0, 4001)
    W = wilcox_terms(op, grid, 8)
    # reference: many small exponential steps at midpoints (second order in the step)
    ts = np.linspace(0.0, 1.0, 20001)
    mids = 0.5 * (ts[1:] + ts[:-1])
    steps = expm(0.5 * op(mids) * (ts[1] - ts[0]))
    ref = np.eye(3, dtype=complex)
    for s in steps:
        ref = s @ ref
    approx = wilcox_propagator(W, -1, 0.5, 8)
    assert np.max(np.abs(approx - ref)) < 1e-7
