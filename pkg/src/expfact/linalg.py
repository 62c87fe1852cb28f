"""Dense small-matrix arithmetic over complex doubles.

Every function accepts a single ``(d, d)`` matrix or a stack ``(..., d, d)``;
stacks are how grid-valued operators are processed node-wise in one call.
"""

from __future__ import annotations

import numpy as np

# Pauli matrices and the so(3) rotation generators used by the worked examples.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

RHO_X = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=complex)
RHO_Y = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=complex)
RHO_Z = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)

class CapExceededError(ValueError):
    """A requested order or degree is above a module's configured cap."""


_EXPM_SCALE_TARGET = 0.5
_EXPM_SERIES_TOL = 1e-16
_EXPM_MAX_TERMS = 60


def as_matrix(x, *, stacked: bool = False) -> np.ndarray:
    """Validate and convert to a complex array of square matrices.

    Raises ``ValueError`` for non-square shapes or non-finite entries.
    """
    m = np.asarray(x, dtype=complex)
    if m.ndim < 2 or (not stacked and m.ndim != 2):
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[-1] != m.shape[-2] or m.shape[-1] < 1:
        raise ValueError(f"matrix must be square with dim >= 1, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def _check_pair(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != y.shape[-1] or x.shape[-2] != y.shape[-2]:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")


def commutator(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    _check_pair(x, y)
    return x @ y - y @ x


def ad_pow(x, y, k: int) -> np.ndarray:
    """ad_x^k(y), with ad_x^0(y) = y."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    x = np.asarray(x, dtype=complex)
    out = np.array(y, dtype=complex)
    _check_pair(x, out)
    for _ in range(k):
        out = x @ out - out @ x
    return out


def dexp_series(omega, c, kmax: int) -> np.ndarray:
    """Truncated d exp: sum_{k=0}^{kmax} ad_omega^k(c) / (k+1)!."""
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    omega = np.asarray(omega, dtype=complex)
    term = np.array(c, dtype=complex)
    _check_pair(omega, term)
    out = term.copy()
    for k in range(1, kmax + 1):
        term = (omega @ term - term @ omega) / (k + 1)
        out = out + term
    return out


def frobenius(x) -> np.ndarray | float:
    """Frobenius norm over the trailing two axes."""
    return np.linalg.norm(np.asarray(x), axis=(-2, -1))


def expm(x) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Taylor series.

    Each matrix is halved until its Frobenius norm is below 0.5; the series
    is summed until the next term falls under 1e-16 of the running sum, then
    the result is squared back.  Works on stacks, with per-matrix scaling.
    """
    a = np.asarray(x, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    single = a.ndim == 2
    a = a.reshape((-1,) + a.shape[-2:])
    norms = np.linalg.norm(a, axis=(-2, -1))
    with np.errstate(divide="ignore"):
        s = np.where(norms > _EXPM_SCALE_TARGET,
                     np.ceil(np.log2(np.maximum(norms, 1e-300) / _EXPM_SCALE_TARGET)), 0)
    s = s.astype(int)
    # guard against log2 rounding leaving the norm on the boundary
    s = s + (norms / 2.0 ** s >= _EXPM_SCALE_TARGET)
    scaled = a / (2.0 ** s)[:, None, None]

    d = a.shape[-1]
    result = np.broadcast_to(np.eye(d, dtype=complex), a.shape).copy()
    term = result.copy()
    for k in range(1, _EXPM_MAX_TERMS + 1):
        term = term @ scaled / k
        result += term
        tn = np.linalg.norm(term, axis=(-2, -1))
        rn = np.linalg.norm(result, axis=(-2, -1))
        if np.all(tn < _EXPM_SERIES_TOL * rn):
            break

    for step in range(int(s.max(initial=0))):
        sel = s > step
        result[sel] = result[sel] @ result[sel]
    return result[0] if single else result.reshape(np.shape(x))


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    eye = np.eye(u.shape[-1])
    return bool(np.max(np.abs(u.conj().swapaxes(-1, -2) @ u - eye)) < tol)


def is_skew_hermitian(x, tol: float = 1e-10) -> bool:
    x = np.asarray(x, dtype=complex)
    return bool(np.max(np.abs(x + x.conj().swapaxes(-1, -2)), initial=0.0) < tol)
