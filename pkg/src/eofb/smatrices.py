"""Indicator matrices S^ij on the 2d-dimensional qubit-qudit space.

For a coefficient vector ``psi`` (qubit-major order), ``psi @ S^ij @ psi`` is
``2 (a_1i a_2j - a_1j a_2i)``, twice one 2x2 minor of the coefficient grid.
Levels ``i < j`` are 1-based throughout, matching the usual channel labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BadIndices, WrongDimension


@dataclass(frozen=True)
class SMatrix:
    d: int
    i: int
    j: int
    matrix: np.ndarray

    @property
    def channel(self) -> tuple[int, int]:
        return (self.i, self.j)

    @property
    def label(self) -> str:
        return f"c_{self.i}{self.j}" if self.d < 10 else f"c_{self.i}_{self.j}"


def _readonly(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


def s_two_qubit() -> SMatrix:
    """The two-qubit spin-flip matrix, sign convention of Wootters' formula.

    This is ``-s_ij(2, 1, 2)``; the sign never matters under absolute values.
    """
    m = np.zeros((4, 4))
    m[0, 3] = m[3, 0] = -1.0
    m[1, 2] = m[2, 1] = 1.0
    return SMatrix(2, 1, 2, _readonly(m))


def s_ij(d: int, i: int, j: int) -> SMatrix:
    if d < 2:
        raise WrongDimension(f"qudit dimension must be >= 2, got {d}")
    if not (1 <= i < j <= d):
        raise BadIndices(f"need 1 <= i < j <= {d}, got ({i}, {j})")
    m = np.zeros((2 * d, 2 * d))
    # 1-based (i, j + d) -> 0-based (i - 1, j + d - 1)
    m[i - 1, j + d - 1] = m[j + d - 1, i - 1] = 1.0
    m[j - 1, i + d - 1] = m[i + d - 1, j - 1] = -1.0
    return SMatrix(d, i, j, _readonly(m))


def channels(d: int) -> list[tuple[int, int]]:
    if d < 2:
        raise WrongDimension(f"qudit dimension must be >= 2, got {d}")
    return list(itertools.combinations(range(1, d + 1), 2))


def s_channels(d: int) -> list[SMatrix]:
    """All d(d-1)/2 indicator matrices in lexicographic (i, j) order."""
    return [s_ij(d, i, j) for i, j in channels(d)]


def minor_values(phi: np.ndarray, s: SMatrix) -> np.ndarray:
    """``phi[:, a]^T S phi[:, a]`` for every column of ``phi`` without forming S."""
    d, i, j = s.d, s.i - 1, s.j - 1
    p = phi if phi.ndim == 2 else phi[:, None]
    sign = -1.0 if s.matrix[i, j + d] < 0 else 1.0
    out = 2.0 * sign * (p[i] * p[j + d] - p[j] * p[i + d])
    return out if phi.ndim == 2 else out[0]
