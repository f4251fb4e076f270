"""Privacy leakage: closed forms, Monte Carlo estimates and parameter sweeps.

Observables are labelled ``"r<round>:<output>"`` (``"r1:absent"`` for a
non-participating toy owner). Joint two-round observables are labelled
``"(<round1>,<round2>)"``. The leakage of an observable is the absolute
log-ratio of its probability under two truthful values; ``epsilon`` is the
maximum over observables and is ``inf`` when some observable is possible
under only one of them.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, is_dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .exceptions import InfiniteLeakage, InvalidParameters
from .mechanisms import RRParams, SampleNoiseParams, SPBinarySpec, SPMultiSpec, ToyParams
from .rng import derive, seed_key
from .simulation import Population, run_trial

MIN_SAMPLES = 10**5


@dataclass(frozen=True)
class EpsilonReport:
    mechanism: str
    params: dict
    per_observable: Tuple[Tuple[str, float], ...]
    epsilon: float = field(init=False)

    def __post_init__(self):
        obs = tuple((str(label), float(value)) for label, value in self.per_observable)
        object.__setattr__(self, "per_observable", obs)
        object.__setattr__(self, "epsilon", max((v for _, v in obs), default=0.0))

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.epsilon)

    def leakage(self, label: str) -> float:
        for name, value in self.per_observable:
            if name == label:
                return value
        raise KeyError(label)

    def unbounded_observables(self) -> List[str]:
        return [name for name, value in self.per_observable if math.isinf(value)]


def _params(spec) -> dict:
    return {k: v for k, v in asdict(spec).items() if k != "cdf"} if is_dataclass(spec) else {}


def log_ratio(p: float, q: float) -> float:
    """``|ln(p / q)|``; zero when both are impossible, ``inf`` when only one is."""
    if p == 0.0 and q == 0.0:
        return 0.0
    if p == 0.0 or q == 0.0:
        return math.inf
    return math.log(max(p, q) / min(p, q))


def rr_epsilon(params: RRParams) -> EpsilonReport:
    yes, no = params.p_yes_given_yes, params.p_yes_given_no
    if no == 0.0:
        raise InfiniteLeakage(
            f"a Yes answer is impossible for No owners (pi1={params.pi1}, pi2={params.pi2})"
        )
    return EpsilonReport("rr", _params(params), (("r1:1", math.log(yes / no)),))


def shift_leakage(pi_out: float, pi_s: float) -> float:
    """Leakage of an output that sampled owners move onto: ``|ln((pi_out + pi_s) / pi_out)|``."""
    if pi_s == 0.0:
        return 0.0
    if pi_out == 0.0:
        raise InfiniteLeakage("output reachable only through the sampling face")
    return abs(math.log((pi_out + pi_s) / pi_out))


def sp_binary_epsilon(spec: SPBinarySpec) -> EpsilonReport:
    """Round two outputs 0 and 1; round one is independent of the truth."""
    eps0 = shift_leakage(spec.pi0, spec.pi_s)
    rest = 1.0 - spec.pi0 - spec.pi_s
    if spec.pi_s == 0.0:
        eps1 = 0.0
    elif rest <= 0.0:
        raise InfiniteLeakage("output 1 in round two is reachable only by sampled Yes owners")
    else:
        eps1 = abs(math.log((1.0 - spec.pi0) / rest))
    obs = (("r1:0", 0.0), ("r1:1", 0.0), ("r2:0", eps0), ("r2:1", eps1))
    return EpsilonReport("sp-binary", _params(spec), obs)


def sp_multi_epsilon(spec: SPMultiSpec, v: int) -> EpsilonReport:
    """Leakage of round-two output ``v`` between truth ``v`` and any other truth.

    This is the truthful-output term only. The output of the alternative
    truth (``0`` for an owner without a value) shifts too; see
    :func:`sp_multi_round_epsilon` for the bound over every output.
    """
    if not 1 <= v <= spec.V:
        raise InvalidParameters(f"v must be in 1..{spec.V}, got {v}")
    eps = shift_leakage(spec.pis[v], spec.pi_s)
    params = dict(_params(spec), v=v)
    return EpsilonReport("sp-multi", params, (("r1:*", 0.0), (f"r2:{v}", eps)))


def sp_multi_round_epsilon(spec: SPMultiSpec) -> EpsilonReport:
    """Per-round leakage over every output and every pair of truths.

    Round-two output ``o`` has probability ``pis[o] + pi_s`` for an owner
    whose truth maps to ``o`` (value ``o``, or no value when ``o == 0``) and
    ``pis[o]`` otherwise, so each output contributes its own shift term.
    """
    per = [("r1:*", 0.0)]
    for o in range(spec.V + 1):
        try:
            per.append((f"r2:{o}", shift_leakage(spec.pis[o], spec.pi_s)))
        except InfiniteLeakage:
            per.append((f"r2:{o}", math.inf))
    return EpsilonReport("sp-multi", _params(spec), tuple(per))


def _mechanism_name(mechanism) -> str:
    return {
        RRParams: "rr",
        ToyParams: "toy",
        SampleNoiseParams: "sample-noise",
        SPBinarySpec: "sp-binary",
        SPMultiSpec: "sp-multi",
    }[type(mechanism)]


def _encode_truth(truth, mechanism) -> int:
    if truth is None:
        if not isinstance(mechanism, SPMultiSpec):
            raise InvalidParameters("None truth only applies to multi-value mechanisms")
        return 0
    return int(truth)


def _marginals(mechanism, truth: int, samples: int, key: int) -> dict:
    n_values = mechanism.V if isinstance(mechanism, SPMultiSpec) else 1
    pop = Population(np.full(samples, truth, dtype=np.int64), n_values)
    table = run_trial(pop, mechanism, key=key)
    freq = {}
    for r in range(table.rounds):
        for j in range(table.n_outputs):
            freq[f"r{r + 1}:{j}"] = table.counts[r, j] / samples
    if isinstance(mechanism, (ToyParams, SampleNoiseParams)):
        freq["r1:absent"] = table.absent / samples
    return freq


def _check_samples(samples: int) -> None:
    if samples < MIN_SAMPLES:
        raise InvalidParameters(f"samples must be >= {MIN_SAMPLES}, got {samples}")


def _default_truths(mechanism):
    return (1, None) if isinstance(mechanism, SPMultiSpec) else (1, 0)


def empirical_epsilon(
    mechanism,
    truths: Optional[Sequence] = None,
    samples: int = 10**6,
    seed: int = 0,
    observables: Optional[Iterable[str]] = None,
) -> EpsilonReport:
    """Monte Carlo leakage over per-round marginal outputs.

    ``samples`` owners are simulated under each of the two truthful values
    with independent streams. ``observables`` restricts the report to the
    given labels (useful to compare with a closed form that covers only some
    outputs).
    """
    _check_samples(samples)
    a, b = truths if truths is not None else _default_truths(mechanism)
    base = seed_key(seed)
    fa = _marginals(mechanism, _encode_truth(a, mechanism), samples, derive(base, 0))
    fb = _marginals(mechanism, _encode_truth(b, mechanism), samples, derive(base, 1))
    keep = set(observables) if observables is not None else None
    obs = [(label, log_ratio(fa[label], fb[label])) for label in fa if keep is None or label in keep]
    if keep is not None and len(obs) != len(keep):
        raise InvalidParameters(f"unknown observables {sorted(keep - set(fa))}")
    params = dict(_params(mechanism), truths=(a, b), samples=samples)
    return EpsilonReport(_mechanism_name(mechanism), params, tuple(obs))


def joint_pair_epsilon(
    spec,
    samples: int = 10**6,
    seed: int = 0,
    truths: Optional[Sequence] = None,
) -> EpsilonReport:
    """Leakage when an observer links an owner's round-one and round-two outputs."""
    _check_samples(samples)
    if not isinstance(spec, (SPBinarySpec, SPMultiSpec)):
        raise InvalidParameters("joint pairs exist only for the two-round mechanisms")
    a, b = truths if truths is not None else _default_truths(spec)
    width = spec.V + 1
    cdf = np.asarray(spec.cdf)
    base = seed_key(seed)
    freqs = []
    for i, truth in enumerate((a, b)):
        t = np.full(samples, _encode_truth(truth, spec), dtype=np.int64)
        r1, r2 = _kernels.sp_responses(cdf, t, derive(base, i))
        freqs.append(np.bincount(r1 * width + r2, minlength=width * width) / samples)
    obs = [
        (f"({c // width},{c % width})", log_ratio(freqs[0][c], freqs[1][c]))
        for c in range(width * width)
    ]
    params = dict(_params(spec), truths=(a, b), samples=samples)
    return EpsilonReport(_mechanism_name(spec) + "-joint", params, tuple(obs))


@dataclass(frozen=True)
class SweepRow:
    mechanism: str
    parameter: str
    value: float
    epsilon: float

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.epsilon)


SWEEP_FAMILIES = ("rr", "sp", "sp-binary")


def epsilon_sweep(family: str, grid: Sequence[float], *, pi1: float = 0.8,
                  pi_s: float = 0.45) -> List[SweepRow]:
    """Closed-form leakage across a grid.

    ``rr`` sweeps the forced-Yes coin ``pi2`` at fixed ``pi1``; ``sp`` sweeps
    the probability of the owner's truthful output at fixed ``pi_s``;
    ``sp-binary`` sweeps ``pi0`` at fixed ``pi_s``. Points with unbounded
    leakage are kept as rows with ``epsilon = inf``.
    """
    if family not in SWEEP_FAMILIES:
        raise InvalidParameters(f"unknown family {family!r}; choose from {SWEEP_FAMILIES}")
    if len(grid) == 0:
        raise InvalidParameters("grid is empty")
    name = {"rr": "pi2", "sp": "pi_v", "sp-binary": "pi0"}[family]
    rows = []
    for x in grid:
        x = float(x)
        try:
            if family == "rr":
                eps = rr_epsilon(RRParams(pi1, x)).epsilon
            elif family == "sp":
                if x + pi_s > 1.0 + 1e-12:
                    raise InvalidParameters(f"pi_v={x} with pi_s={pi_s} exceeds total mass 1")
                spec = SPMultiSpec(pis=(max(0.0, 1.0 - x - pi_s), x), pi_s=pi_s)
                eps = sp_multi_epsilon(spec, 1).epsilon
            else:
                eps = sp_binary_epsilon(SPBinarySpec(x, pi_s)).epsilon
        except InfiniteLeakage:
            eps = math.inf
        rows.append(SweepRow(family, name, x, eps))
    return rows
