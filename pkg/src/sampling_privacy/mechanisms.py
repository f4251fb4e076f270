"""Privatization mechanisms.

Each ``*_privatize`` function maps one data owner's truthful value to its
privatized output(s) using an explicit randomness source ``rand`` (anything
with a ``random() -> float`` method: :class:`~sampling_privacy.rng.CounterStream`
or a ``numpy.random.Generator``). Given the same stream the output is fixed.

Encoding of truthful values:

* binary mechanisms: ``0`` / ``False`` is No, ``1`` / ``True`` is Yes;
* multi-value mechanisms: ``None`` (or ``0``) is an owner without the
  monitored attribute, ``v`` in ``1..V`` is the owner's value.

Outputs are integers; ``None`` stands for a non-participating owner (the
toy constructions only).
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Protocol, Sequence

import numpy as np

from .exceptions import InvalidParameters

NO = 0
YES = 1
ABSENT = None

SUM_TOLERANCE = 1e-9


class RandomSource(Protocol):
    def random(self) -> float: ...


class ResponsePair(NamedTuple):
    round1: Optional[int]
    round2: Optional[int]


def _check_prob(name: str, value: float, *, low_open=False, high_open=False) -> float:
    value = float(value)
    if math.isnan(value):
        raise InvalidParameters(f"{name} is NaN")
    lo_ok = value > 0.0 if low_open else value >= 0.0
    hi_ok = value < 1.0 if high_open else value <= 1.0
    if not (lo_ok and hi_ok):
        lo = "(" if low_open else "["
        hi = ")" if high_open else "]"
        raise InvalidParameters(f"{name}={value} outside {lo}0, 1{hi}")
    return value


@dataclass(frozen=True)
class RRParams:
    """Two-coin randomized response.

    ``pi1`` is the probability of answering truthfully; otherwise the owner
    answers Yes with probability ``pi2``. Boundary values are accepted so the
    degenerate cases (no noise, no truth) can be expressed; operations that
    cannot handle them raise.
    """

    pi1: float
    pi2: float

    def __post_init__(self):
        object.__setattr__(self, "pi1", _check_prob("pi1", self.pi1))
        object.__setattr__(self, "pi2", _check_prob("pi2", self.pi2))

    @property
    def p_yes_given_yes(self) -> float:
        return self.pi1 + (1.0 - self.pi1) * self.pi2

    @property
    def p_yes_given_no(self) -> float:
        return (1.0 - self.pi1) * self.pi2


@dataclass(frozen=True)
class SampleNoiseParams:
    """Sampling without deniability: participate (answer 1) with probability ``pi_s``."""

    pi_s: float

    def __post_init__(self):
        object.__setattr__(self, "pi_s", _check_prob("pi_s", self.pi_s, low_open=True))


@dataclass(frozen=True)
class ToyParams:
    """Participation sampling followed by two-coin randomized response."""

    pi_s: float
    pi1: float
    pi2: float

    def __post_init__(self):
        object.__setattr__(self, "pi_s", _check_prob("pi_s", self.pi_s, low_open=True))
        object.__setattr__(self, "pi1", _check_prob("pi1", self.pi1))
        object.__setattr__(self, "pi2", _check_prob("pi2", self.pi2, high_open=True))

    @property
    def p_yes_given_yes(self) -> float:
        return self.pi_s * (self.pi1 + (1.0 - self.pi1) * self.pi2)

    @property
    def p_yes_given_no(self) -> float:
        return self.pi_s * (1.0 - self.pi1) * self.pi2


def _cdf(probs: Sequence[float]) -> tuple:
    cdf = np.cumsum(np.asarray(probs, dtype=np.float64))
    cdf[-1] = 1.0
    return tuple(float(c) for c in cdf)


@dataclass(frozen=True)
class SPMultiSpec:
    """Two-round sampling mechanism over outputs ``0..V``.

    ``pis[j]`` is the probability of die face ``j`` (written to output ``j``
    in both rounds); ``pi_s`` is the hidden sampling face, which writes to
    output 0 in round one and to the owner's value in round two. All
    ``V + 2`` face probabilities must sum to one.
    """

    pis: tuple
    pi_s: float
    cdf: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pis = tuple(float(p) for p in self.pis)
        if len(pis) < 2:
            raise InvalidParameters("need probabilities for outputs 0..V with V >= 1")
        for j, p in enumerate(pis):
            _check_prob(f"pis[{j}]", p)
        pi_s = _check_prob("pi_s", self.pi_s)
        total = math.fsum(pis) + pi_s
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidParameters(f"face probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "pis", pis)
        object.__setattr__(self, "pi_s", pi_s)
        object.__setattr__(self, "cdf", _cdf(pis + (pi_s,)))

    @property
    def V(self) -> int:
        return len(self.pis) - 1

    @property
    def face_probs(self) -> tuple:
        """Probabilities in die order ``(face_0, ..., face_V, sampled)``."""
        return self.pis + (self.pi_s,)

    @classmethod
    def uniform(cls, V: int, pi_s: float) -> "SPMultiSpec":
        """Spread ``1 - pi_s`` evenly over outputs ``0..V``."""
        if V < 1:
            raise InvalidParameters("V must be >= 1")
        rest = (1.0 - pi_s) / (V + 1)
        return cls(pis=(rest,) * (V + 1), pi_s=pi_s)


@dataclass(frozen=True)
class SPBinarySpec:
    """Two-round sampling mechanism with outputs {0, 1}.

    The die has faces zero (``pi0``), one (``1 - pi0 - pi_s``) and sampled
    (``pi_s``). It is the ``V = 1`` case of :class:`SPMultiSpec` and draws
    faces in the same order, so both produce identical responses from the
    same stream.
    """

    pi0: float
    pi_s: float

    def __post_init__(self):
        pi0 = _check_prob("pi0", self.pi0)
        pi_s = _check_prob("pi_s", self.pi_s)
        if pi0 + pi_s > 1.0 + SUM_TOLERANCE:
            raise InvalidParameters(f"pi0 + pi_s = {pi0 + pi_s} exceeds 1")
        object.__setattr__(self, "pi0", pi0)
        object.__setattr__(self, "pi_s", pi_s)

    @property
    def pi1(self) -> float:
        return max(0.0, 1.0 - self.pi0 - self.pi_s)

    @property
    def V(self) -> int:
        return 1

    def as_multi(self) -> SPMultiSpec:
        return SPMultiSpec(pis=(self.pi0, self.pi1), pi_s=self.pi_s)

    @property
    def cdf(self) -> tuple:
        return self.as_multi().cdf


def draw_face(cdf: Sequence[float], u: float) -> int:
    """Inverse-CDF die roll: the first face whose cumulative mass exceeds ``u``."""
    return bisect.bisect_right(cdf, u)


def _binary_truth(truth) -> int:
    if truth in (0, 1):
        return int(truth)
    raise InvalidParameters(f"binary truth must be 0/1, got {truth!r}")


def rr_privatize(truth, params: RRParams, rand: RandomSource) -> int:
    """Answer truthfully on a ``pi1`` coin, else answer Yes on a ``pi2`` coin."""
    truth = _binary_truth(truth)
    if rand.random() < params.pi1:
        return truth
    return YES if rand.random() < params.pi2 else NO


def toy_sample_noise(truth, params, rand: RandomSource) -> Optional[int]:
    """Answer 1 with probability ``pi_s`` whatever the truth; otherwise abstain.

    The estimate of the Yes population is not identifiable from this
    mechanism's output; it exists as a counter-example.
    """
    _binary_truth(truth)
    if not isinstance(params, SampleNoiseParams):
        params = SampleNoiseParams(params)
    return 1 if rand.random() < params.pi_s else ABSENT


def toy_privatize(truth, params: ToyParams, rand: RandomSource) -> Optional[int]:
    """Participate with probability ``pi_s``, then answer by randomized response."""
    truth = _binary_truth(truth)
    if not rand.random() < params.pi_s:
        return ABSENT
    if rand.random() < params.pi1:
        return truth
    return YES if rand.random() < params.pi2 else NO


def sp_multi_privatize(truth, spec: SPMultiSpec, rand: RandomSource) -> ResponsePair:
    if truth is None:
        truth = 0
    elif not (isinstance(truth, (int, np.integer)) and 0 <= truth <= spec.V):
        raise InvalidParameters(f"truth must be None or 1..{spec.V}, got {truth!r}")
    face = draw_face(spec.cdf, rand.random())
    sampled = spec.V + 1
    if face == sampled:
        return ResponsePair(0, int(truth))
    return ResponsePair(face, face)


def sp_binary_privatize(truth, spec: SPBinarySpec, rand: RandomSource) -> ResponsePair:
    """Round one is truth-independent; round two moves sampled Yes owners from 0 to 1."""
    truth = _binary_truth(truth)
    face = draw_face(spec.cdf, rand.random())
    if face == 2:
        return ResponsePair(0, truth)
    return ResponsePair(face, face)
