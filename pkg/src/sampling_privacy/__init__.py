"""Sampling-based differentially private counting.

Randomized response, two toy sampling constructions and the two-round
sampling mechanism (binary and multi-value), with their estimators,
leakage accounting, a Monte Carlo harness and dataset loaders.
"""
from ._kernels import BACKEND
from .estimation import (
    CountTable,
    Estimate,
    rr_estimate,
    sp_binary_estimate,
    sp_multi_estimate,
    toy_estimate,
)
from .exceptions import DatasetError, InfiniteLeakage, InvalidParameters, MalformedCounts
from .mechanisms import (
    ResponsePair,
    RRParams,
    SampleNoiseParams,
    SPBinarySpec,
    SPMultiSpec,
    ToyParams,
    rr_privatize,
    sp_binary_privatize,
    sp_multi_privatize,
    toy_privatize,
    toy_sample_noise,
)
from .privacy import (
    EpsilonReport,
    empirical_epsilon,
    epsilon_sweep,
    joint_pair_epsilon,
    rr_epsilon,
    sp_binary_epsilon,
    sp_multi_epsilon,
    sp_multi_round_epsilon,
)
from .rng import CounterStream
from .simulation import (
    AggregatorModel,
    Population,
    PopulationSpec,
    TrialStats,
    generate_population,
    run_experiment,
    run_trial,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CountTable", "Estimate", "rr_estimate", "sp_binary_estimate", "sp_multi_estimate",
    "toy_estimate",
    "DatasetError", "InfiniteLeakage", "InvalidParameters", "MalformedCounts",
    "ResponsePair", "RRParams", "SampleNoiseParams", "SPBinarySpec", "SPMultiSpec", "ToyParams",
    "rr_privatize", "sp_binary_privatize", "sp_multi_privatize", "toy_privatize",
    "toy_sample_noise",
    "EpsilonReport", "empirical_epsilon", "epsilon_sweep", "joint_pair_epsilon", "rr_epsilon",
    "sp_binary_epsilon", "sp_multi_epsilon", "sp_multi_round_epsilon",
    "CounterStream",
    "AggregatorModel", "Population", "PopulationSpec", "TrialStats", "generate_population",
    "run_experiment", "run_trial",
]
