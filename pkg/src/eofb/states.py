"""Pure and mixed qubit-qudit states.

Coefficient vectors use the product basis ``u_i v_j`` flattened qubit-major:
``a_11, ..., a_1d, a_21, ..., a_2d``. Reshaping a state to ``(2, d)`` gives the
coefficient matrix ``a[i, j]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import entr

from .errors import (
    BadRank,
    ConsistencyError,
    NotNormalized,
    NotPSD,
    NotUnitTrace,
    OutOfRange,
    WrongDimension,
)
from .linalg import DEFAULT_TOL, as_matrix, hermitian_eig

NORM_TOL = 1e-10
_LN2 = np.log(2.0)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    d: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if self.d < 2:
            raise WrongDimension(f"qudit dimension must be >= 2, got {self.d}")
        if c.size != 2 * self.d:
            raise WrongDimension(f"expected {2 * self.d} coefficients for d={self.d}, got {c.size}")
        norm2 = float(np.vdot(c, c).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NotNormalized(f"sum |a_ij|^2 = {norm2!r}, expected 1")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def from_unnormalized(cls, d: int, coeffs) -> "PureState":
        c = np.asarray(coeffs, dtype=complex).ravel()
        return cls(d, c / np.linalg.norm(c))

    @property
    def grid(self) -> np.ndarray:
        """The 2 x d coefficient matrix a[i, j]."""
        return self.coeffs.reshape(2, self.d)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.d, np.outer(self.coeffs, self.coeffs.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    d: int
    matrix: np.ndarray
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = 2 * self.d
        if self.d < 2:
            raise WrongDimension(f"qudit dimension must be >= 2, got {self.d}")
        if m.shape != (n, n):
            raise WrongDimension(f"expected a {n}x{n} matrix for d={self.d}, got {m.shape}")
        w = hermitian_eig(m, self.tol).eigenvalues
        if w[-1] < -self.tol:
            raise NotPSD(float(w[-1]), self.tol)
        tr = np.trace(m)
        if abs(tr - 1.0) > NORM_TOL:
            raise NotUnitTrace(f"trace is {tr.real!r}{tr.imag:+.3e}j, expected 1")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))

    @property
    def dim(self) -> int:
        return 2 * self.d

    def rank(self) -> int:
        w = hermitian_eig(self.matrix, self.tol).eigenvalues
        return int(np.sum(w > 1e-12 * w[0]))


@dataclass(frozen=True)
class SchmidtData:
    c1: float
    c2: float
    left_vectors: np.ndarray  # 2 x 2, columns
    right_vectors: np.ndarray  # d x 2, columns

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(2 * self.right_vectors.shape[0], dtype=complex)
        for c, u, v in zip((self.c1, self.c2), self.left_vectors.T, self.right_vectors.T):
            out += c * np.kron(u, v)
        return out


def gram_matrix(psi: PureState) -> np.ndarray:
    """The 2x2 matrix b = A A^dagger of the coefficient grid (reduced state of the qubit)."""
    a = psi.grid
    return a @ a.conj().T


def _complete_orthonormal(v: np.ndarray) -> np.ndarray:
    """A unit vector orthogonal to unit vector ``v`` (deterministic)."""
    best, best_norm = None, -1.0
    for k in range(v.size):
        e = np.zeros(v.size, dtype=complex)
        e[k] = 1.0
        r = e - v * np.vdot(v, e)
        n = np.linalg.norm(r)
        if n > best_norm + 1e-12:
            best, best_norm = r, n
    return best / best_norm


def schmidt(psi: PureState) -> SchmidtData:
    a = psi.grid
    # SVD of the 2 x d grid: its squared singular values are the eigenvalues of
    # b = A A^dagger, but the small one is not lost to cancellation.
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    c1, c2 = float(s[0]), float(s[1])
    left = u.copy()
    right = vh.T.copy()
    for k in range(2):
        col = left[:, k]
        phase = col[np.argmax(np.abs(col))]
        phase = phase / abs(phase)
        left[:, k] = col / phase
        right[:, k] = right[:, k] * phase
    if c2 == 0.0:
        right[:, 1] = _complete_orthonormal(right[:, 0])
    return SchmidtData(c1, c2, left, right)


def _binary_entropy_of_squares(p: np.ndarray) -> float:
    return float(np.sum(entr(np.clip(p, 0.0, 1.0))) / _LN2)


def entropy_pure(psi: PureState) -> float:
    """Von Neumann entropy of either reduced state, in bits."""
    sd = schmidt(psi)
    return _binary_entropy_of_squares(np.array([sd.c1**2, sd.c2**2]))


def concurrence_from_minors(grid: np.ndarray) -> float:
    """2 * sqrt(sum_{i<j} |a_1i a_2j - a_1j a_2i|^2)."""
    a = np.asarray(grid)
    total = 0.0
    for i, j in itertools.combinations(range(a.shape[1]), 2):
        total += abs(a[0, i] * a[1, j] - a[0, j] * a[1, i]) ** 2
    return 2.0 * float(np.sqrt(total))


def concurrence_pure(psi: PureState) -> float:
    sd = schmidt(psi)
    c = 2.0 * sd.c1 * sd.c2
    alt = concurrence_from_minors(psi.grid)
    if abs(c - alt) > 1e-10:
        raise ConsistencyError(f"2 c1 c2 = {c!r} but the minor sum gives {alt!r}")
    return min(c, 1.0)


def epsilon(c: float) -> float:
    """Entanglement (bits) of a pure qubit-qudit state with concurrence ``c``."""
    c = float(c)
    if c < -1e-12 or c > 1.0 + 1e-12 or not np.isfinite(c):
        raise OutOfRange(f"concurrence {c!r} outside [0, 1]")
    c = min(max(c, 0.0), 1.0)
    root = np.sqrt(1.0 - c * c)
    # (1 - root)/2 written without cancellation
    small = c * c / (2.0 * (1.0 + root))
    return _binary_entropy_of_squares(np.array([1.0 - small, small]))


def reduced_density(psi: PureState, subsystem: Literal["A", "B"] = "A") -> np.ndarray:
    a = psi.grid
    if subsystem == "A":
        return a @ a.conj().T
    if subsystem == "B":
        return a.T @ a.conj()
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def linear_entropy_identity_check(grid) -> tuple[float, float]:
    """Both sides of 1 - Tr(rho_A^2) = 2 sum_{m>i, n>j} |a_ij a_mn - a_in a_mj|^2.

    ``grid`` is the d_A x d_B coefficient matrix of a normalized bipartite
    pure state; neither side needs d_A = 2.
    """
    a = np.asarray(grid, dtype=complex)
    if a.ndim != 2:
        raise WrongDimension(f"expected a d_A x d_B grid, got shape {a.shape}")
    norm2 = float(np.vdot(a, a).real)
    if abs(norm2 - 1.0) > NORM_TOL:
        raise NotNormalized(f"sum |a_ij|^2 = {norm2!r}, expected 1")
    rho_a = a @ a.conj().T
    lhs = 1.0 - float(np.trace(rho_a @ rho_a).real)
    rhs = 0.0
    d_a, d_b = a.shape
    for i, m in itertools.combinations(range(d_a), 2):
        for j, n in itertools.combinations(range(d_b), 2):
            rhs += abs(a[i, j] * a[m, n] - a[i, n] * a[m, j]) ** 2
    return lhs, 2.0 * rhs


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure(d: int, seed=None) -> PureState:
    """Haar-random qubit-qudit pure state."""
    if d < 2:
        raise WrongDimension(f"qudit dimension must be >= 2, got {d}")
    return PureState.from_unnormalized(d, _gaussian(_rng(seed), 2 * d))


def random_density(d: int, rank: int, seed=None) -> DensityMatrix:
    """Induced-measure random state: G G^dagger / Tr with G a 2d x rank Ginibre matrix."""
    if d < 2:
        raise WrongDimension(f"qudit dimension must be >= 2, got {d}")
    if not 1 <= rank <= 2 * d:
        raise BadRank(f"rank must be in [1, {2 * d}] for d={d}, got {rank}")
    g = _gaussian(_rng(seed), (2 * d, rank))
    rho = g @ g.conj().T
    return DensityMatrix(d, rho / np.trace(rho).real)


def random_separable(d: int, terms: int, seed=None) -> DensityMatrix:
    """Dirichlet-weighted mixture of ``terms`` random product states."""
    if d < 2:
        raise WrongDimension(f"qudit dimension must be >= 2, got {d}")
    if terms < 1:
        raise BadRank(f"need at least one term, got {terms}")
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((2 * d, 2 * d), dtype=complex)
    for p in weights:
        qubit = _gaussian(rng, 2)
        qudit = _gaussian(rng, d)
        v = np.kron(qubit / np.linalg.norm(qubit), qudit / np.linalg.norm(qudit))
        rho += p * np.outer(v, v.conj())
    return DensityMatrix(d, rho / np.trace(rho).real)


def embed_two_qubit(rho: np.ndarray, d: int) -> DensityMatrix:
    """Place a 4x4 two-qubit state on qudit levels 1, 2 of a qubit-qudit space."""
    m = np.asarray(rho, dtype=complex)
    idx = [0, 1, d, d + 1]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[np.ix_(idx, idx)] = m
    return DensityMatrix(d, out)
