"""Fer expansion and the modified (intermediate) Fer expansion on a grid.

Standard Fer takes every exponent as the full integral of the previous
residual generator,

    Omega_n = int_0^t B_{n-1},
    B_n     = sum_{k>=1} (-1)^k k / (k+1)! ad_{Omega_n}^k B_{n-1},

so Omega_n starts at order lambda^(2^(n-1)).  The modified expansion keeps in
Omega_n only the orders lambda^(2^(n-1)) .. lambda^(2^n - 1); it is built
here up to Omega_3.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import expm
from .operators import Grid, GridSeries, _cumint_values

DEFAULT_TOL = 1e-14
DEFAULT_KMAX = 40


def _ad(x, y):
    return x @ y - y @ x


def _norms(x):
    return np.linalg.norm(x, axis=(-2, -1))


def ad_series(omega: np.ndarray, x: np.ndarray, coeff, *, kmin: int = 1,
              tol: float = DEFAULT_TOL, kmax: int = DEFAULT_KMAX) -> np.ndarray:
    """sum_{k=kmin}^{...} coeff(k) ad_omega^k x, node-wise.

    Stops once every node's k-th term is below ``tol`` times the accumulated
    norm there, or at ``kmax``.
    """
    term = x
    for _ in range(kmin):
        term = _ad(omega, term)
    acc = coeff(kmin) * term
    for k in range(kmin + 1, kmax + 1):
        term = _ad(omega, term)
        contrib = coeff(k) * term
        acc = acc + contrib
        if np.all(_norms(contrib) <= tol * _norms(acc)):
            break
    return acc


def _fer_coeff(k: int) -> float:
    return (-1) ** k * k / math.factorial(k + 1)


def fer_terms(op, grid: Grid, n_transforms: int, tol: float = DEFAULT_TOL,
              kmax: int = DEFAULT_KMAX) -> tuple[list[GridSeries], list[GridSeries]]:
    """Return ``(omegas, b_series)`` = ([Omega_1..Omega_n], [B_0..B_n])."""
    if n_transforms < 1:
        raise ValueError("n_transforms must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    b = np.asarray(op(grid.nodes), dtype=complex)
    bs = [b]
    omegas = []
    for _ in range(n_transforms):
        omega = _cumint_values(b, grid.h)
        b = ad_series(omega, b, _fer_coeff, tol=tol, kmax=kmax)
        omegas.append(omega)
        bs.append(b)
    return [GridSeries(grid, o) for o in omegas], [GridSeries(grid, x) for x in bs]


def truncated_b1(omega1: np.ndarray, b0: np.ndarray, j: int) -> np.ndarray:
    """B_1^[j] = sum_{k=1}^{j} (-1)^k k/(k+1)! ad_{Omega_1}^k B_0."""
    term = b0
    acc = np.zeros_like(b0)
    for k in range(1, j + 1):
        term = _ad(omega1, term)
        acc = acc + _fer_coeff(k) * term
    return acc


def _modified_fer_rates(op, grid: Grid, complete: bool = False):
    b0 = np.asarray(op(grid.nodes), dtype=complex)
    omega1 = _cumint_values(b0, grid.h)
    omega2_dot = truncated_b1(omega1, b0, 2)
    omega2 = _cumint_values(omega2_dot, grid.h)
    b1_4 = truncated_b1(omega1, b0, 4)
    ad_o2_dot = _ad(omega2, omega2_dot)
    omega3_dot = (-_ad(omega2, b1_4) + 0.5 * ad_o2_dot
                  + 0.5 * _ad(omega2, _ad(omega2, omega2_dot))
                  - _ad(omega2, ad_o2_dot) / 6.0)
    if complete:
        # the k = 0 term of the B_2 series, B_1 - O2', truncated at lambda^7
        omega3_dot = omega3_dot + truncated_b1(omega1, b0, 6) - omega2_dot
    omega3 = _cumint_values(omega3_dot, grid.h)
    return b0, (omega1, omega2, omega3), (b0, omega2_dot, omega3_dot)


def modified_fer_terms(op, grid: Grid, *, complete: bool = False
                       ) -> tuple[GridSeries, GridSeries, GridSeries]:
    """Omega_1, Omega_2, Omega_3 of the modified Fer expansion.

    Omega_1' = A
    Omega_2' = -1/2 ad_{O1} A + 1/3 ad_{O1}^2 A
    Omega_3' = -ad_{O2} B1^[4] + 1/2 ad_{O2} O2' + 1/2 ad_{O2}^2 B1^[2] - 1/6 ad_{O2}^2 O2'

    This Omega_3' leaves out B1 - O2' = B1 - B1^[2], which is O(lambda^4), so
    the three-factor product is no more accurate than the two-factor one.
    ``complete=True`` adds B1^[6] - B1^[2], after which the product error is
    O(lambda^8).
    """
    _, omegas, _ = _modified_fer_rates(op, grid, complete)
    return tuple(GridSeries(grid, o) for o in omegas)


def modified_fer_residual(op, grid: Grid, tol: float = DEFAULT_TOL,
                          kmax: int = DEFAULT_KMAX) -> GridSeries:
    """Generator B_2 left after the first two modified-Fer transformations.

    B_1 is the full Fer residual of Omega_1 and
    B_2 = sum_{k>=0} (-1)^k/(k+1)! ((k+1) ad_{O2}^k B_1 - ad_{O2}^k O2'),
    which is O(lambda^4) when A carries a factor lambda.
    """
    b0, (omega1, omega2, _), (_, omega2_dot, _) = _modified_fer_rates(op, grid)
    b1 = ad_series(omega1, b0, _fer_coeff, tol=tol, kmax=kmax)
    part_b = ad_series(omega2, b1, lambda k: (-1) ** k / math.factorial(k), kmin=0, tol=tol, kmax=kmax)
    part_d = ad_series(omega2, omega2_dot, lambda k: (-1) ** k / math.factorial(k + 1), kmin=0,
                       tol=tol, kmax=kmax)
    return GridSeries(grid, part_b - part_d)


def fer_product(omegas, t_index: int = -1) -> np.ndarray:
    """expm(Omega_1(t)) expm(Omega_2(t)) ... at one node."""
    d = omegas[0].dim
    out = np.eye(d, dtype=complex)
    for o in omegas:
        out = out @ expm(o[t_index])
    return out
