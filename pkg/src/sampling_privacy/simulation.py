"""Synthetic populations, aggregated protocol runs and trial statistics.

A trial privatizes every owner of a population and hands each response to
one of ``k`` simulated aggregators. Aggregators only ever hold their own
count tables; the released table is their elementwise sum. Randomness for
owner ``i`` in trial ``t`` is the counter stream
``derive(derive(trials_key, t), i)``, so a trial can be recomputed from
``(master_seed, t)`` alone and trials may run in any order or in parallel.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .estimation import (
    CountTable,
    rr_estimate,
    sp_binary_estimate,
    sp_multi_estimate,
    toy_estimate,
)
from .exceptions import InvalidParameters
from .mechanisms import RRParams, SampleNoiseParams, SPBinarySpec, SPMultiSpec, ToyParams
from .rng import derive, seed_key

Mechanism = Union[RRParams, ToyParams, SampleNoiseParams, SPBinarySpec, SPMultiSpec]

_POPULATION_STREAM = 0
_TRIAL_STREAM = 1
_ASSIGN_STREAM = 2


@dataclass(frozen=True)
class PopulationSpec:
    """``yes_counts[v - 1]`` owners hold value ``v``; ``no_count`` hold none."""

    yes_counts: tuple
    no_count: int

    def __post_init__(self):
        yes = (self.yes_counts,) if np.ndim(self.yes_counts) == 0 else tuple(self.yes_counts)
        yes = tuple(int(y) for y in yes)
        if not yes:
            raise InvalidParameters("need at least one value")
        if any(y < 0 for y in yes) or self.no_count < 0:
            raise InvalidParameters("population counts must be non-negative")
        if sum(yes) + self.no_count <= 0:
            raise InvalidParameters("population is empty")
        object.__setattr__(self, "yes_counts", yes)
        object.__setattr__(self, "no_count", int(self.no_count))

    @classmethod
    def binary(cls, yes: int, no: int) -> "PopulationSpec":
        return cls((yes,), no)

    @property
    def n_values(self) -> int:
        return len(self.yes_counts)

    @property
    def total(self) -> int:
        return sum(self.yes_counts) + self.no_count


@dataclass(frozen=True)
class Population:
    """Owners in a fixed order; ``truths[i]`` is 0 (No / None) or a value ``1..V``."""

    truths: np.ndarray
    n_values: int

    def __len__(self):
        return int(self.truths.shape[0])

    def truth_of(self, i: int):
        """Owner ``i``'s truthful value in the mechanism encoding."""
        t = int(self.truths[i])
        if self.n_values == 1:
            return t
        return t or None

    def histogram(self) -> np.ndarray:
        return np.bincount(self.truths, minlength=self.n_values + 1)[1:]


def generate_population(spec: PopulationSpec, seed: int) -> Population:
    parts = [np.full(c, v, dtype=np.int64) for v, c in enumerate(spec.yes_counts, start=1)]
    parts.append(np.zeros(spec.no_count, dtype=np.int64))
    truths = np.concatenate(parts)
    truths = np.random.default_rng(seed).permutation(truths)
    truths.setflags(write=False)
    return Population(truths, spec.n_values)


@dataclass(frozen=True)
class AggregatorModel:
    """``k`` non-colluding aggregators; owners are routed by a seeded hash of their index."""

    k: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameters(f"need at least one aggregator, got {self.k}")

    @property
    def assign_key(self) -> int:
        return derive(seed_key(self.seed), _ASSIGN_STREAM)

    def assignment(self, n_owners: int) -> np.ndarray:
        idx = np.arange(n_owners, dtype=np.uint64)
        return _kernels._py._assign(self.assign_key, idx, self.k)


def _check_arity(population: Population, mechanism: Mechanism) -> None:
    if isinstance(mechanism, SPMultiSpec):
        if population.n_values != mechanism.V:
            raise InvalidParameters(
                f"mechanism has V={mechanism.V} but population has {population.n_values} values"
            )
    elif isinstance(mechanism, (RRParams, ToyParams, SampleNoiseParams, SPBinarySpec)):
        if population.n_values != 1:
            raise InvalidParameters(
                f"{type(mechanism).__name__} is binary; population has {population.n_values} values"
            )
    else:
        raise InvalidParameters(f"unknown mechanism {mechanism!r}")


def _count(truths: np.ndarray, mechanism: Mechanism, key: int, aggregators: AggregatorModel):
    k, akey = aggregators.k, aggregators.assign_key
    if isinstance(mechanism, (SPBinarySpec, SPMultiSpec)):
        raw = _kernels.sp_counts(np.asarray(mechanism.cdf), truths, key, k, akey)
        return [CountTable(raw[a]) for a in range(k)]
    if isinstance(mechanism, RRParams):
        raw = _kernels.rr_counts(truths, mechanism.pi1, mechanism.pi2, key, k, akey)
        return [CountTable(raw[a][None, :]) for a in range(k)]
    if isinstance(mechanism, SampleNoiseParams):
        # coin one never fires and coin two always does: every participant answers 1
        raw = _kernels.toy_counts(truths, mechanism.pi_s, 0.0, 1.0, key, k, akey)
    else:
        raw = _kernels.toy_counts(
            truths, mechanism.pi_s, mechanism.pi1, mechanism.pi2, key, k, akey
        )
    return [CountTable(raw[a][None, :2], absent=raw[a][2]) for a in range(k)]


def combine(tables: Sequence[CountTable]) -> CountTable:
    total = tables[0]
    for t in tables[1:]:
        total = total + t
    return total


def run_trial(
    population: Population,
    mechanism: Mechanism,
    aggregators: Optional[AggregatorModel] = None,
    seed: int = 0,
    *,
    per_aggregator: bool = False,
    key: Optional[int] = None,
):
    """Privatize every owner once and return the released (combined) count table.

    ``key`` overrides the trial key derived from ``seed``. With
    ``per_aggregator=True`` the individual aggregator tables are returned
    instead of their sum.
    """
    _check_arity(population, mechanism)
    aggregators = aggregators or AggregatorModel()
    if key is None:
        key = seed_key(seed)
    tables = _count(population.truths, mechanism, key, aggregators)
    return tables if per_aggregator else combine(tables)


def trial_keys(master_seed: int, trials: int) -> List[int]:
    base = derive(seed_key(master_seed), _TRIAL_STREAM)
    return [derive(base, t) for t in range(trials)]


def population_seed(master_seed: int) -> int:
    return derive(seed_key(master_seed), _POPULATION_STREAM)


def trial_tables(
    spec: PopulationSpec,
    mechanism: Mechanism,
    trials: int,
    master_seed: int,
    aggregators: Optional[AggregatorModel] = None,
    *,
    workers: int = 1,
) -> List[CountTable]:
    """Released tables of ``trials`` independent runs over one fixed population."""
    population = generate_population(spec, population_seed(master_seed))
    _check_arity(population, mechanism)
    aggregators = aggregators or AggregatorModel()
    keys = trial_keys(master_seed, trials)

    def one(key):
        return combine(_count(population.truths, mechanism, key, aggregators))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, keys))
    return [one(k) for k in keys]


def estimate_from_table(table: CountTable, mechanism: Mechanism, n_total: int) -> np.ndarray:
    """Per-value estimates (length ``V``; length 1 for binary mechanisms)."""
    if isinstance(mechanism, SPMultiSpec):
        return np.asarray(sp_multi_estimate(table, mechanism).per_output, dtype=np.float64)
    if isinstance(mechanism, SPBinarySpec):
        return np.array([sp_binary_estimate(table, mechanism).value])
    if isinstance(mechanism, RRParams):
        return np.array([rr_estimate(table.count(1, 1), n_total, mechanism).value])
    if isinstance(mechanism, ToyParams):
        return np.array([toy_estimate(table.count(1, 1), n_total, mechanism).value])
    raise InvalidParameters(f"no estimator for {type(mechanism).__name__}")


@dataclass(frozen=True)
class TrialStats:
    trials: int
    mean_estimate: float
    stddev: float
    mean_abs_error: float
    error_bound_95: float
    ground_truth: int
    normal_bound_95: float
    estimates: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_estimates(cls, estimates, ground_truth: int) -> "TrialStats":
        est = np.asarray(estimates, dtype=np.float64)
        if est.ndim != 1 or est.shape[0] < 2:
            raise InvalidParameters("need at least two trial estimates")
        err = np.abs(est - ground_truth)
        mean = float(est.mean())
        sd = float(est.std(ddof=1))
        return cls(
            trials=int(est.shape[0]),
            mean_estimate=mean,
            stddev=sd,
            mean_abs_error=float(err.mean()),
            error_bound_95=float(np.percentile(err, 97.5)),
            ground_truth=int(ground_truth),
            normal_bound_95=abs(mean - ground_truth) + 1.96 * sd,
            estimates=est,
        )


def simulate_estimates(
    spec: PopulationSpec,
    mechanism: Mechanism,
    trials: int,
    master_seed: int,
    aggregators: Optional[AggregatorModel] = None,
    *,
    workers: int = 1,
) -> np.ndarray:
    """Estimates of shape ``(trials, V)`` from seeded independent runs."""
    if trials < 2:
        raise InvalidParameters(f"trials must be >= 2, got {trials}")
    tables = trial_tables(spec, mechanism, trials, master_seed, aggregators, workers=workers)
    return np.stack([estimate_from_table(t, mechanism, spec.total) for t in tables])


def run_experiment(
    spec: PopulationSpec,
    mechanism: Mechanism,
    trials: int,
    master_seed: int,
    aggregators: Optional[AggregatorModel] = None,
    *,
    value: Optional[int] = None,
    workers: int = 1,
) -> TrialStats:
    """Trial statistics for the total Yes population, or for one value ``v``."""
    est = simulate_estimates(spec, mechanism, trials, master_seed, aggregators, workers=workers)
    if value is None:
        return TrialStats.from_estimates(est.sum(axis=1), sum(spec.yes_counts))
    if not 1 <= value <= spec.n_values:
        raise InvalidParameters(f"value {value} outside 1..{spec.n_values}")
    return TrialStats.from_estimates(est[:, value - 1], spec.yes_counts[value - 1])


def run_experiment_per_value(
    spec: PopulationSpec,
    mechanism: Mechanism,
    trials: int,
    master_seed: int,
    aggregators: Optional[AggregatorModel] = None,
    *,
    workers: int = 1,
) -> List[TrialStats]:
    est = simulate_estimates(spec, mechanism, trials, master_seed, aggregators, workers=workers)
    return [
        TrialStats.from_estimates(est[:, v], spec.yes_counts[v]) for v in range(spec.n_values)
    ]
