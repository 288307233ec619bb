"""Shared state builders for the test-suite."""

import math

import numpy as np

from eofb.states import DensityMatrix


def singlet() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def bell() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def werner_matrix(p: float) -> np.ndarray:
    s = singlet()
    return p * np.outer(s, s.conj()) + (1 - p) * np.eye(4) / 4


def werner(p: float) -> DensityMatrix:
    return DensityMatrix(2, werner_matrix(p))


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def werner_concurrence(p: float) -> float:
    return max(0.0, (3 * p - 1) / 2)
