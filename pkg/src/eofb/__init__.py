"""Concurrence and entanglement-of-formation bounds for qubit-qudit states."""

from .bounds import BoundReport, cdb_bound, channel_bound, channel_lambdas, wootters_concurrence, wootters_eof
from .decomposition import Decomposition, average_concurrence, optimal_channel_decomposition
from .errors import EofbError
from .oracle import SearchConfig, bound_gap_experiment, minimize_average
from .smatrices import s_ij, s_two_qubit
from .states import DensityMatrix, PureState, concurrence_pure, entropy_pure, epsilon

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "Decomposition",
    "DensityMatrix",
    "EofbError",
    "PureState",
    "SearchConfig",
    "average_concurrence",
    "bound_gap_experiment",
    "cdb_bound",
    "channel_bound",
    "channel_lambdas",
    "concurrence_pure",
    "entropy_pure",
    "epsilon",
    "minimize_average",
    "optimal_channel_decomposition",
    "s_ij",
    "s_two_qubit",
    "wootters_concurrence",
    "wootters_eof",
]
