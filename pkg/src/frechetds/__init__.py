"""Distance oracles and near-neighbour indices under the discrete Frechet distance."""

from . import kernels
from .ann import AnnIndex, DeterministicAnnIndex, partition
from .compose import chain_query, merge_oracles
from .errors import BudgetExceeded, InputError, OutOfRange
from .geometry import discrete_frechet
from .oracle import DistanceOracle, build_oracle
from .simplify import gonzalez_simplify, stream_simplify
from .streaming import StreamConfig, StreamingOracle

__version__ = "0.1.0"

__all__ = [
    "kernels",
    "AnnIndex",
    "DeterministicAnnIndex",
    "partition",
    "chain_query",
    "merge_oracles",
    "BudgetExceeded",
    "InputError",
    "OutOfRange",
    "discrete_frechet",
    "DistanceOracle",
    "build_oracle",
    "gonzalez_simplify",
    "stream_simplify",
    "StreamConfig",
    "StreamingOracle",
]
