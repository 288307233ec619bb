"""Concurrence spectra, Wootters' two-qubit formula and the qubit-qudit lower bound.

For each channel (i, j) the spectrum ``lambda`` is the square root of the
eigenvalues of ``rho^1/2 S rho* S rho^1/2``. That matrix equals ``M M^dagger``
with ``M = F^T S F`` for any factor ``rho = F F^dagger``, so ``lambda`` is
computed as the singular values of ``M``; this keeps zero entries at rounding
level instead of the square root of rounding level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import BadIndices, DimensionMismatch, NegativeInput, WrongDimension
from .linalg import DEFAULT_TOL, descending_order, psd_factor, psd_sqrt
from .smatrices import SMatrix, channels, s_ij, s_two_qubit
from .states import DensityMatrix, epsilon

Mode = Literal["exact-two-qubit", "lower-bound"]


@dataclass(frozen=True)
class ChannelSpectrum:
    channel: tuple[int, int]
    lambdas: np.ndarray

    @property
    def bound(self) -> float:
        return concurrence_from_spectrum(self.lambdas)


@dataclass(frozen=True)
class BoundReport:
    d: int
    channels: tuple[tuple[int, int], ...]
    spectra: tuple[ChannelSpectrum, ...]
    c_ij: tuple[float, ...]
    c_db: float
    eof_lower: float
    mode: Mode
    wootters_c: float | None = None
    wootters_eof: float | None = None
    rank: int = field(default=0)

    @property
    def headline(self) -> float:
        """C(rho) itself for two qubits, otherwise the lower bound on it."""
        return self.wootters_c if self.wootters_c is not None else self.c_db

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "rank": self.rank,
            "mode": self.mode,
            "channels": [
                {
                    "channel": list(sp.channel),
                    "lambdas": [float(x) for x in sp.lambdas],
                    "c_ij": c,
                }
                for sp, c in zip(self.spectra, self.c_ij)
            ],
            "c_db": self.c_db,
            "eof_lower": self.eof_lower,
            "wootters_c": self.wootters_c,
            "wootters_eof": self.wootters_eof,
        }


def concurrence_from_spectrum(lambdas: Sequence[float]) -> float:
    lam = np.zeros(4)
    top = np.asarray(lambdas, dtype=float)[:4]
    lam[: top.size] = top
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def _check_compatible(rho: DensityMatrix, s: SMatrix) -> None:
    if s.matrix.shape != (rho.dim, rho.dim):
        raise DimensionMismatch(
            f"S is {s.matrix.shape[0]}x{s.matrix.shape[0]} but rho is {rho.dim}x{rho.dim}"
        )


def channel_lambdas(rho: DensityMatrix, s: SMatrix, tol: float = DEFAULT_TOL) -> ChannelSpectrum:
    _check_compatible(rho, s)
    f = psd_factor(rho.matrix, tol)
    lam = np.linalg.svd(f.T @ s.matrix @ f, compute_uv=False)
    lam = lam[descending_order(lam)]
    lam.setflags(write=False)
    return ChannelSpectrum(s.channel, lam)


def hermitian_form_eigenvalues(rho: DensityMatrix, s: SMatrix, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues of rho^1/2 S rho* S rho^1/2 by direct Hermitian eigensolve, descending."""
    _check_compatible(rho, s)
    r = psd_sqrt(rho.matrix, tol)
    m = r @ s.matrix @ rho.matrix.conj() @ s.matrix @ r
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return w[::-1]


def nonhermitian_form_eigenvalues(rho: DensityMatrix, s: SMatrix) -> np.ndarray:
    """Eigenvalues of rho S rho* S (real parts), descending."""
    _check_compatible(rho, s)
    m = rho.matrix @ s.matrix @ rho.matrix.conj() @ s.matrix
    w = np.linalg.eigvals(m).real
    return w[descending_order(w)]


def spectrum_crosscheck(rho: DensityMatrix, s: SMatrix, tol: float = DEFAULT_TOL) -> float:
    """Largest disagreement among the three routes to the squared spectrum."""
    lam2 = channel_lambdas(rho, s, tol).lambdas ** 2
    herm = hermitian_form_eigenvalues(rho, s, tol)
    nonh = nonhermitian_form_eigenvalues(rho, s)
    return float(max(np.max(np.abs(lam2 - herm)), np.max(np.abs(lam2 - nonh)), np.max(np.abs(herm - nonh))))


def _require_two_qubit(rho: DensityMatrix) -> None:
    if rho.d != 2:
        raise WrongDimension(f"Wootters' formula needs two qubits (d=2), got d={rho.d}")


def wootters_concurrence(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> float:
    _require_two_qubit(rho)
    return channel_lambdas(rho, s_two_qubit(), tol).bound


def wootters_eof(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> float:
    return epsilon(wootters_concurrence(rho, tol))


def channel_bound(rho: DensityMatrix, channel: tuple[int, int], tol: float = DEFAULT_TOL) -> float:
    i, j = channel
    if not (1 <= i < j <= rho.d):
        raise BadIndices(f"need 1 <= i < j <= {rho.d}, got ({i}, {j})")
    return channel_lambdas(rho, s_ij(rho.d, i, j), tol).bound


def aggregate_lower(values: Sequence[float]) -> float:
    """Root-sum-square of nonnegative per-channel sums.

    The minimum of sum_a |(x_a, y_a, ...)| over nonnegative splits with fixed
    totals (X, Y, ...) is |(X, Y, ...)|.
    """
    vals = [float(v) for v in values]
    if any(v < 0 for v in vals):
        raise NegativeInput(f"channel sums must be nonnegative, got {vals}")
    return math.sqrt(math.fsum(v * v for v in vals))


def cdb_bound(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> BoundReport:
    chans = tuple(channels(rho.d))
    spectra = tuple(channel_lambdas(rho, s_ij(rho.d, i, j), tol) for i, j in chans)
    c_ij = tuple(sp.bound for sp in spectra)
    c_db = aggregate_lower(c_ij)
    extra = {}
    mode: Mode = "lower-bound"
    if rho.d == 2:
        mode = "exact-two-qubit"
        wc = wootters_concurrence(rho, tol)
        extra = {"wootters_c": wc, "wootters_eof": epsilon(wc)}
    return BoundReport(
        d=rho.d,
        channels=chans,
        spectra=spectra,
        c_ij=c_ij,
        c_db=c_db,
        eof_lower=epsilon(min(c_db, 1.0)),
        mode=mode,
        rank=rho.rank(),
        **extra,
    )


def local_frame(d: int, seed=None) -> np.ndarray:
    """A Haar-random product unitary U_A (x) U_B."""
    from scipy.stats import unitary_group

    rng = np.random.default_rng(seed)
    ua = unitary_group.rvs(2, random_state=rng)
    ub = unitary_group.rvs(d, random_state=rng)
    return np.kron(ua, ub)


def local_unitary_spread(rho: DensityMatrix, samples: int = 32, seed=0, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """(min, max) of c_db over random local frames of rho.

    C(rho) is invariant under local unitaries while c_db is not once d > 2,
    so every value here is a valid lower bound and the max is the tightest.
    """
    rng = np.random.default_rng(seed)
    values = [cdb_bound(rho, tol).c_db]
    for _ in range(samples):
        u = local_frame(rho.d, rng)
        rotated = DensityMatrix(rho.d, u @ rho.matrix @ u.conj().T, tol)
        values.append(cdb_bound(rotated, tol).c_db)
    return min(values), max(values)
