"""Convergence bound for the Wilcox expansion.

With ||A(t)|| <= k(t) and K(t) = int_0^t k, one has ||W_n|| <= c_n K^n where

    alpha_{0,1} = 1, alpha_{0,l} = 0 (l > 1)
    alpha_{n,l} = sum_{j=0}^{floor((l-1)/n)-1} (2 c_n)^j / j! (alpha_{n-1,l-nj} + beta_{n,l-nj})
    beta_{n,r}  = 2^(m-1) n c_n^m / m!   if r = n m, else 0
    c_1 = 1, c_2 = 1/2, c_n = alpha_{n-2,n} / n

The ratio D_n = c_{n+1}/c_n tends to a limit D_inf and the expansion
converges while K(t) < 1/D_inf.  The coefficients grow like D_inf^n and
overflow doubles well before n = 2000, hence the log-domain fill.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

FER_BOUND = 0.8604065


@dataclass(frozen=True)
class BoundTable:
    N: int
    log_alpha: np.ndarray  # (N, N + 2): row n, column l; -inf encodes zero
    log_c: np.ndarray      # index n for 1 <= n <= N; entry 0 unused (nan)
    D: np.ndarray          # index n for 3 <= n <= N; entries below 3 unused (nan)

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(3, self.N + 1)

    @property
    def d_values(self) -> np.ndarray:
        return self.D[3:]

    def c(self, n: int) -> float:
        return math.exp(self.log_c[n])


def bound_coefficients(N: int) -> BoundTable:
    if N < 3:
        raise ValueError("N must be >= 3")
    ncols = N + 2
    log_alpha = np.full((N, ncols), -np.inf)
    log_alpha[0, 1] = 0.0
    log_c = np.full(N + 1, np.nan)
    log_c[1] = 0.0
    log_c[2] = math.log(0.5)
    cols = np.arange(ncols)
    for n in range(1, N):
        if n > 2:
            log_c[n] = log_alpha[n - 2, n] - math.log(n)
        lc = log_c[n]
        # alpha_{n-1,r} + beta_{n,r}
        src = log_alpha[n - 1].copy()
        m = np.arange(1, (ncols - 1) // n + 1)
        log_beta = (m - 1) * math.log(2) + math.log(n) + m * lc - gammaln(m + 1)
        src[n * m] = np.logaddexp(src[n * m], log_beta)
        row = np.full(ncols, -np.inf)
        jmax = (ncols - 2) // n - 1
        for j in range(jmax + 1):
            # contributes to every l with l > n, floor((l-1)/n) - 1 >= j, i.e. l >= n (j + 1) + 1
            lo = n * (j + 1) + 1
            if lo >= ncols:
                break
            weight = j * (math.log(2) + lc) - math.lgamma(j + 1)
            row[lo:] = np.logaddexp(row[lo:], weight + src[lo - n * j:ncols - n * j])
        row[cols <= n] = -np.inf
        log_alpha[n] = row
    # last c needs row N-2
    log_c[N] = log_alpha[N - 2, N] - math.log(N)
    D = np.full(N + 1, np.nan)
    for n in range(3, N + 1):
        D[n] = math.exp(math.log(n / (n + 1)) + log_alpha[n - 1, n + 1] - log_alpha[n - 2, n])
    return BoundTable(N, log_alpha, log_c, D)


def extrapolate_radius(D, tail_fraction: float = 0.5, n_start: int = 3) -> tuple[float, float]:
    """Least-squares line of D_n against 1/n over the tail; returns (intercept, 1/intercept).

    ``D`` holds D_n for consecutive n beginning at ``n_start``.
    """
    d = np.asarray(D, dtype=float)
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must be in (0, 1]")
    n = np.arange(n_start, n_start + len(d))
    k = int(math.ceil(tail_fraction * len(d)))
    if k < 10:
        raise ValueError(f"need at least 10 tail points, have {k}")
    x = 1.0 / n[-k:]
    slope, intercept = np.polyfit(x, d[-k:], 1)
    return float(intercept), float(1.0 / intercept)


def fer_bound() -> float:
    return FER_BOUND
