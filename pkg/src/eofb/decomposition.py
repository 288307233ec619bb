"""Explicit decompositions of a density matrix and channel-optimal constructions.

A decomposition is stored as the matrix ``phi`` whose columns are
``sqrt(p_a) psi_a``, so ``rho == phi @ phi^dagger``. Every other decomposition
is ``W @ R`` for the eigen-factor ``W`` of rho and some ``R`` with orthonormal
rows (on the support of ``W``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import concurrence_from_spectrum
from .errors import BadRightMatrix, BadSize, NotInRegime
from .linalg import DEFAULT_TOL, psd_factor, takagi
from .smatrices import SMatrix, minor_values, s_channels
from .states import DensityMatrix, PureState, epsilon

RIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Decomposition:
    d: int
    phi: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.sum(np.abs(self.phi) ** 2, axis=0)

    @property
    def n_columns(self) -> int:
        return self.phi.shape[1]

    def states(self) -> list[tuple[float, PureState]]:
        """(p_a, psi_a) for every nonzero column."""
        out = []
        for p, col in zip(self.weights, self.phi.T):
            if p > 0:
                out.append((float(p), PureState(self.d, col / math.sqrt(p))))
        return out

    def density(self) -> np.ndarray:
        return self.phi @ self.phi.conj().T

    def residual(self, rho: DensityMatrix) -> float:
        return float(np.max(np.abs(self.density() - rho.matrix)))


@dataclass(frozen=True)
class ChannelAverages:
    channels: tuple[tuple[int, int], ...]
    per_channel: tuple[float, ...]
    total: float
    values: np.ndarray  # channels x N, |phi_a^T S phi_a|


def eigen_decomposition(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> Decomposition:
    return Decomposition(rho.d, psd_factor(rho.matrix, tol))


def _support(w: Decomposition) -> np.ndarray:
    return np.flatnonzero(np.any(w.phi != 0, axis=0))


def apply_right(w: Decomposition, r: np.ndarray) -> Decomposition:
    r = np.asarray(r, dtype=complex)
    if r.ndim != 2 or r.shape[0] != w.n_columns:
        raise BadRightMatrix(f"R must have {w.n_columns} rows, got shape {r.shape}")
    rows = r[_support(w)]
    dev = float(np.max(np.abs(rows @ rows.conj().T - np.eye(rows.shape[0])), initial=0.0))
    if dev > RIGHT_TOL:
        raise BadRightMatrix(f"rows of R on the support are not orthonormal (deviation {dev:.3e})")
    return Decomposition(w.d, w.phi @ r)


def average_concurrence(dec: Decomposition, s_list: Sequence[SMatrix] | None = None) -> ChannelAverages:
    s_list = list(s_channels(dec.d)) if s_list is None else list(s_list)
    values = np.abs(np.array([minor_values(dec.phi, s) for s in s_list]))
    per_channel = tuple(float(v) for v in values.sum(axis=1))
    total = float(np.sum(np.sqrt(np.sum(values**2, axis=0))))
    return ChannelAverages(tuple(s.channel for s in s_list), per_channel, total, values)


def average_entanglement(dec: Decomposition) -> float:
    """sum_a p_a E(psi_a), with E from each state's full concurrence."""
    values = np.abs(np.array([minor_values(dec.phi, s) for s in s_channels(dec.d)]))
    con = np.sqrt(np.sum(values**2, axis=0))
    total = 0.0
    for p, c in zip(dec.weights, con):
        if p > 0:
            total += p * epsilon(min(c / p, 1.0))
    return total


def channel_values(q: np.ndarray, lambdas: Sequence[float]) -> np.ndarray:
    """sum_m lambda_m Q_ma^2 for every column a."""
    lam = np.zeros(q.shape[0])
    given = np.asarray(lambdas, dtype=float)[: q.shape[0]]
    lam[: given.size] = given
    return lam @ (q**2)


_SIGNS = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ],
    dtype=float,
)


def _padded(block: np.ndarray, n: int) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    out[:4, :4] = block
    return out


def _check_size(n: int) -> None:
    if n < 4 or n % 2:
        raise BadSize(f"size must be even and >= 4, got {n}")


def q_greater(n: int = 4) -> np.ndarray:
    """Unitary whose squared rows sum to +1 (row 1) and -1 (rows 2-4)."""
    _check_size(n)
    phases = np.array([1, 1j, 1j, 1j])[:, None]
    return _padded(0.5 * phases * _SIGNS, n)


def solve_angles(lambdas: Sequence[float]) -> tuple[float, float, float]:
    """Real angles closing lambda_1 + sum_{m>1} lambda_m exp(2 i theta_m) = 0.

    Four sides close into a quadrilateral iff the longest is no longer than the
    other three together. Fix the side lambda_4 so that lambda_1 + lambda_4 e^{i phi}
    has a length L the (lambda_2, lambda_3) pair can span, then close that
    triangle with the law of cosines.
    """
    l1, l2, l3, l4 = (float(x) for x in lambdas[:4])
    if l1 - l2 - l3 - l4 > 1e-12 * max(l1, 1.0):
        raise NotInRegime(f"lambda_1 - lambda_2 - lambda_3 - lambda_4 = {l1 - l2 - l3 - l4:.3e} > 0")
    if l1 == 0.0:
        return 0.0, 0.0, 0.0
    target = max(l1 - l4, l2 - l3, 0.0)
    phi4 = 0.0
    if l4 > 0:
        cos4 = (target**2 - l1**2 - l4**2) / (2 * l1 * l4)
        phi4 = math.acos(min(1.0, max(-1.0, cos4)))
    v = l1 + l4 * complex(math.cos(phi4), math.sin(phi4))
    length, base = abs(v), math.atan2(v.imag, v.real)
    # l2 e^{i a} + l3 e^{i b} = -v; here l2 > 0 since l1 > 0 and l1 <= l2 + l3 + l4
    if l3 == 0.0 or length == 0.0:
        phi2 = math.pi + base
        phi3 = phi2 + math.pi
    else:
        cos_a = (l2**2 + length**2 - l3**2) / (2 * l2 * length)
        a = math.acos(min(1.0, max(-1.0, cos_a)))
        phi2 = math.pi + base + a
        w = -v - l2 * complex(math.cos(phi2), math.sin(phi2))
        phi3 = math.atan2(w.imag, w.real)
    return phi2 / 2, phi3 / 2, phi4 / 2


def closure_residual(lambdas: Sequence[float], thetas: Sequence[float]) -> float:
    l1, l2, l3, l4 = lambdas[:4]
    t2, t3, t4 = thetas
    return abs(l1 + l2 * np.exp(2j * t2) + l3 * np.exp(2j * t3) + l4 * np.exp(2j * t4))


def q_less(lambdas: Sequence[float], n: int | None = None) -> np.ndarray:
    """Unitary making sum_m lambda_m Q_ma^2 vanish for every column."""
    n = len(lambdas) if n is None else n
    _check_size(n)
    t2, t3, t4 = solve_angles(lambdas)
    phases = np.exp(1j * np.array([0.0, t2, t3, t4]))[:, None]
    return _padded(0.5 * phases * _SIGNS, n)


def extend_columns(q: np.ndarray, n: int) -> np.ndarray:
    """Widen a row-orthonormal Q to n columns by splitting columns.

    Equivalent to ``[Q | 0] P`` for a real orthogonal P whose leading rows
    have disjoint supports: column a becomes k_a copies scaled by
    1/sqrt(k_a), so every per-column value keeps its sign.
    """
    m = q.shape[1]
    if n < m:
        raise BadSize(f"cannot shrink {m} columns to {n}")
    counts = np.ones(m, dtype=int)
    for k in range(n - m):
        counts[k % m] += 1
    cols = [q[:, a : a + 1] / math.sqrt(k) for a, k in enumerate(counts) for _ in range(k)]
    return np.hstack(cols)


@dataclass(frozen=True)
class ChannelConstruction:
    lambdas: np.ndarray
    takagi_unitary: np.ndarray
    q: np.ndarray
    r: np.ndarray
    decomposition: Decomposition
    regime: str  # "greater" or "less"

    @property
    def bound(self) -> float:
        return concurrence_from_spectrum(self.lambdas)


def construct_channel_optimum(
    rho: DensityMatrix, s: SMatrix, n: int | None = None, tol: float = DEFAULT_TOL
) -> ChannelConstruction:
    dim = rho.dim
    n = dim if n is None else n
    if n < dim:
        raise BadSize(f"need at least {dim} columns, got {n}")
    w = eigen_decomposition(rho, tol)
    tk = takagi(w.phi.T @ s.matrix @ w.phi, tol)
    lam = tk.diagonal
    if lam[0] - lam[1] - lam[2] - lam[3] >= 0:
        q, regime = q_greater(dim), "greater"
    else:
        q, regime = q_less(lam, dim), "less"
    q = extend_columns(q, n)
    r = tk.unitary.conj().T @ q
    dec = apply_right(w, r)
    return ChannelConstruction(lam, tk.unitary, q, r, dec, regime)


def optimal_channel_decomposition(
    rho: DensityMatrix, s: SMatrix, n: int | None = None, tol: float = DEFAULT_TOL
) -> Decomposition:
    """A decomposition whose channel-s average equals max(0, l1 - l2 - l3 - l4)."""
    return construct_channel_optimum(rho, s, n, tol).decomposition
