"""Dense complex matrix primitives.

All routines take plain ``numpy`` arrays and return fresh arrays; nothing is
modified in place.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import NonFinite, NotHermitian, NotPSD, NotSquare, NotSymmetric, TakagiFailure

DEFAULT_TOL = 1e-9

_EPS = np.finfo(float).eps


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns


class TakagiFactorization(NamedTuple):
    """``m == unitary.T @ diag(diagonal) @ unitary``."""

    diagonal: np.ndarray
    unitary: np.ndarray


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise NotSquare(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has NaN or infinite entries")
    return a


def _square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def descending_order(values: np.ndarray) -> np.ndarray:
    """Indices sorting ``values`` descending, ties kept in original order."""
    return np.argsort(-np.asarray(values), kind="stable")


def hermitian_eig(m, tol: float = DEFAULT_TOL) -> HermitianEig:
    a = _square(m)
    dev = hermitian_deviation(a)
    if dev > tol:
        raise NotHermitian(dev, tol)
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    order = descending_order(w)
    return HermitianEig(w[order], v[:, order])


def noise_floor(eigenvalues: np.ndarray) -> float:
    """Magnitude below which an eigenvalue is indistinguishable from rounding."""
    n = max(len(eigenvalues), 1)
    scale = float(np.max(np.abs(eigenvalues), initial=0.0))
    return 16 * n * _EPS * scale


def psd_sqrt(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    w, v = hermitian_eig(m, tol)
    if w.size and w[-1] < -tol:
        raise NotPSD(float(w[-1]), tol)
    w = np.where(w > noise_floor(w), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def takagi(m, tol: float = DEFAULT_TOL) -> TakagiFactorization:
    """Autonne-Takagi factorization of a complex symmetric matrix.

    With ``m = u diag(s) vh`` (SVD), ``vh @ conj(u)`` is unitary and commutes
    with ``diag(s)`` on every block of equal nonzero singular values, so its
    principal square root rotates ``u`` into a basis ``V`` with
    ``m = V diag(s) V^T``. Degenerate blocks need no special handling.
    """
    a = _square(m)
    dev = float(np.max(np.abs(a - a.T), initial=0.0))
    if dev > tol:
        raise NotSymmetric(dev, tol)
    a = 0.5 * (a + a.T)
    u, s, vh = np.linalg.svd(a)
    root = scipy.linalg.sqrtm((vh @ u.conj()).T)
    v = u @ root
    unitary = v.T
    residual = np.max(np.abs(unitary.T @ (s[:, None] * unitary) - a), initial=0.0)
    scale = max(1.0, float(s[0]) if s.size else 0.0)
    if not np.isfinite(residual) or residual > 1e-9 * scale:
        raise TakagiFailure(f"Takagi reconstruction residual {residual:.3e}")
    return TakagiFactorization(s, unitary)


def is_unitary(m, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    a = _square(m)
    dev = float(np.max(np.abs(a @ a.conj().T - np.eye(a.shape[0])), initial=0.0))
    return dev <= tol, dev


def row_orthonormality_deviation(m: np.ndarray) -> float:
    """max |m m^dagger - I| for a matrix whose rows should be orthonormal."""
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])), initial=0.0))


def psd_factor(m, tol: float = DEFAULT_TOL, rel_zero: float = 1e-12) -> np.ndarray:
    """Columns ``sqrt(mu_s) w_s`` from the eigenpairs of a PSD matrix, descending.

    ``m == F @ F^dagger``. Eigenvalues at or below ``rel_zero * max(mu)`` give
    exactly-zero columns so the factor's rank is the numerical rank of ``m``.
    """
    w, v = hermitian_eig(m, tol)
    if w.size and w[-1] < -tol:
        raise NotPSD(float(w[-1]), tol)
    top = float(w[0]) if w.size else 0.0
    w = np.where(w > rel_zero * top, w, 0.0)
    return v * np.sqrt(w)
