"""Recovering the truthful Yes population from released counts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InvalidParameters, MalformedCounts
from .mechanisms import RRParams, SPBinarySpec, SPMultiSpec, ToyParams


@dataclass(frozen=True)
class CountTable:
    """Aggregated counts: ``counts[r, j]`` owners reporting output ``j`` in round ``r``.

    Single-round mechanisms have one row. ``absent`` counts owners that did
    not participate (toy mechanisms only), so ``counts[r].sum() + absent`` is
    the number of owners asked.
    """

    counts: np.ndarray
    absent: int = 0

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape[0] not in (1, 2) or counts.shape[1] < 1:
            raise MalformedCounts(f"counts must be (1 or 2) x outputs, got shape {counts.shape}")
        if (counts < 0).any() or self.absent < 0:
            raise MalformedCounts("counts must be non-negative")
        if not np.array_equal(counts, np.asarray(self.counts)):
            raise MalformedCounts("counts must be integers")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "absent", int(self.absent))

    @property
    def rounds(self) -> int:
        return self.counts.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.counts.shape[1]

    def count(self, round_: int, output: int) -> int:
        """Count for a 1-based round number and an output value."""
        return int(self.counts[round_ - 1, output])

    def round_total(self, round_: int) -> int:
        return int(self.counts[round_ - 1].sum()) + self.absent

    def __add__(self, other: "CountTable") -> "CountTable":
        if not isinstance(other, CountTable):
            return NotImplemented
        if other.counts.shape != self.counts.shape:
            raise MalformedCounts(f"cannot add tables {self.counts.shape} and {other.counts.shape}")
        return CountTable(self.counts + other.counts, self.absent + other.absent)

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return self.absent == other.absent and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.counts.tobytes(), self.counts.shape, self.absent))


@dataclass(frozen=True)
class Estimate:
    """Raw estimator output; ``per_output[v - 1]`` is the estimate for value ``v``."""

    value: float
    per_output: Optional[np.ndarray] = None

    @property
    def clamped(self) -> float:
        return max(0.0, self.value)

    @property
    def per_output_clamped(self) -> Optional[np.ndarray]:
        if self.per_output is None:
            return None
        return np.maximum(self.per_output, 0.0)

    def for_value(self, v: int) -> float:
        if self.per_output is None:
            if v != 1:
                raise IndexError(v)
            return self.value
        return float(self.per_output[v - 1])


def _check_counts(yes_count: int, n_total: int) -> None:
    if n_total <= 0:
        raise InvalidParameters(f"n_total must be positive, got {n_total}")
    if not 0 <= yes_count <= n_total:
        raise InvalidParameters(f"yes_count={yes_count} not in [0, {n_total}]")


def rr_estimate(yes_count: int, n_total: int, params: RRParams) -> Estimate:
    """Subtract the expected forced-Yes answers, then undo the truthful-coin thinning."""
    _check_counts(yes_count, n_total)
    if params.pi1 == 0.0:
        raise InvalidParameters("pi1 = 0: responses carry no information about the truth")
    noise = params.p_yes_given_no * n_total
    return Estimate((yes_count - noise) / params.pi1)


def toy_estimate(yes_count: int, n_total: int, params: ToyParams) -> Estimate:
    """Invert the sampled randomized response given the experimenter-known total.

    ``n_total`` counts every owner asked (Yes and No populations together),
    participating or not.
    """
    _check_counts(yes_count, n_total)
    scale = params.pi_s * params.pi1
    if scale == 0.0:
        raise InvalidParameters("pi_s * pi1 = 0: estimator is undefined")
    noise = params.pi_s * (1.0 - params.pi1) * params.pi2 * n_total
    return Estimate((yes_count - noise) / scale)


def _round_differences(counts: CountTable, n_outputs: int, pi_s: float) -> np.ndarray:
    if not isinstance(counts, CountTable):
        raise MalformedCounts(f"expected a CountTable, got {type(counts).__name__}")
    if counts.rounds != 2 or counts.n_outputs != n_outputs:
        raise MalformedCounts(
            f"expected 2 rounds x {n_outputs} outputs, got {counts.rounds} x {counts.n_outputs}"
        )
    if pi_s <= 0.0:
        raise InvalidParameters("pi_s must be positive to estimate")
    return (counts.counts[1, 1:] - counts.counts[0, 1:]) / pi_s


def sp_binary_estimate(counts: CountTable, spec: SPBinarySpec) -> Estimate:
    # the population size never enters: only the shift between rounds does
    return Estimate(float(_round_differences(counts, 2, spec.pi_s)[0]))


def sp_multi_estimate(counts: CountTable, spec: SPMultiSpec) -> Estimate:
    per = _round_differences(counts, spec.V + 1, spec.pi_s)
    per.setflags(write=False)
    return Estimate(float(per.sum()), per)
