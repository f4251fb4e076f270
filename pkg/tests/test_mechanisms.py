import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rr_yes_probability, sp_pair_distribution, toy_yes_probability
from sampling_privacy.exceptions import InvalidParameters
from sampling_privacy.mechanisms import (
    RRParams,
    SampleNoiseParams,
    SPBinarySpec,
    SPMultiSpec,
    ToyParams,
    draw_face,
    rr_privatize,
    sp_binary_privatize,
    sp_multi_privatize,
    toy_privatize,
    toy_sample_noise,
)
from sampling_privacy.rng import CounterStream, seed_key


def streams(seed, n):
    key = seed_key(seed)
    return (CounterStream.for_owner(key, i) for i in range(n))


def frequency(fn, n, seed=0):
    return sum(1 for s in streams(seed, n) if fn(s)) / n


class TestRandomizedResponse:
    def test_yes_probability_closed_form(self):
        p = RRParams(0.85, 0.3)
        assert p.p_yes_given_yes == pytest.approx(0.895)
        assert p.p_yes_given_no == pytest.approx(0.045)

    def test_yes_owner_monte_carlo(self):
        p = RRParams(0.85, 0.3)
        f = frequency(lambda s: rr_privatize(1, p, s) == 1, 10**5)
        assert f == pytest.approx(0.895, abs=0.005)

    def test_no_owner_monte_carlo(self):
        p = RRParams(0.85, 0.3)
        f = frequency(lambda s: rr_privatize(0, p, s) == 1, 10**5, seed=1)
        assert f == pytest.approx(0.045, abs=0.005)

    def test_no_forced_coin_means_no_owners_always_answer_no(self):
        p = RRParams(0.6, 0.0)
        assert all(rr_privatize(0, p, s) == 0 for s in streams(2, 2000))

    @pytest.mark.parametrize("pi1,pi2", list(itertools.product([0.2, 0.5, 0.85], [0.1, 0.3, 0.7])))
    def test_marginal_grid(self, pi1, pi2):
        p = RRParams(pi1, pi2)
        for truth in (0, 1):
            f = frequency(lambda s: rr_privatize(truth, p, s) == 1, 10**5, seed=truth)
            assert f == pytest.approx(rr_yes_probability(truth, pi1, pi2), abs=0.005)

    @pytest.mark.parametrize("pi1,pi2", [(-0.1, 0.5), (0.5, 1.5), (float("nan"), 0.1)])
    def test_rejects_invalid(self, pi1, pi2):
        with pytest.raises(InvalidParameters):
            RRParams(pi1, pi2)


class TestSampleNoise:
    def test_certain_sampling(self):
        assert all(toy_sample_noise(0, 1.0, s) == 1 for s in streams(0, 500))

    def test_frequency_is_truth_independent(self):
        for truth in (0, 1):
            f = frequency(lambda s: toy_sample_noise(truth, 0.3, s) == 1, 10**5, seed=truth)
            assert f == pytest.approx(0.3, abs=0.005)

    def test_never_answers_zero(self):
        outs = {toy_sample_noise(t, 0.4, s) for t, s in zip(itertools.cycle((0, 1)), streams(3, 5000))}
        assert outs == {1, None}

    def test_zero_sampling_rejected(self):
        with pytest.raises(InvalidParameters):
            SampleNoiseParams(0.0)


class TestToy:
    @pytest.mark.parametrize("truth,expected", [(1, 0.40), (0, 0.10)])
    def test_yes_probability(self, truth, expected):
        p = ToyParams(0.5, 0.6, 0.5)
        assert toy_yes_probability(truth, 0.5, 0.6, 0.5) == pytest.approx(expected)
        assert (p.p_yes_given_yes if truth else p.p_yes_given_no) == pytest.approx(expected)
        f = frequency(lambda s: toy_privatize(truth, p, s) == 1, 10**5, seed=10 + truth)
        assert f == pytest.approx(expected, abs=0.005)

    def test_absent_rate(self):
        p = ToyParams(0.5, 0.6, 0.5)
        f = frequency(lambda s: toy_privatize(1, p, s) is None, 10**5, seed=4)
        assert f == pytest.approx(0.5, abs=0.005)

    def test_full_participation_without_noise(self):
        p = ToyParams(1.0, 0.6, 0.0)
        assert all(toy_privatize(0, p, s) == 0 for s in streams(5, 2000))


class TestSamplingPrivacyBinary:
    def test_no_owner_rounds_identical(self):
        spec = SPBinarySpec(0.3, 0.25)
        assert all(r.round1 == r.round2 for r in (sp_binary_privatize(0, spec, s) for s in streams(0, 5000)))

    def test_yes_owner_marginals(self):
        spec = SPBinarySpec(0.3, 0.25)
        pairs = [sp_binary_privatize(1, spec, s) for s in streams(1, 10**5)]
        r1 = np.mean([p.round1 for p in pairs])
        r2 = np.mean([p.round2 for p in pairs])
        # oracle: sum face probabilities landing on output 1
        law = sp_pair_distribution((0.3, 0.45, 0.25), 1)
        assert sum(p for (a, _), p in law.items() if a == 1) == pytest.approx(0.45)
        assert sum(p for (_, b), p in law.items() if b == 1) == pytest.approx(0.70)
        assert r1 == pytest.approx(0.45, abs=0.005)
        assert r2 == pytest.approx(0.70, abs=0.005)

    def test_shift_probability_is_sampling_face(self):
        law = sp_pair_distribution((0.3, 0.45, 0.25), 1)
        assert law[(0, 1)] == pytest.approx(0.25)
        spec = SPBinarySpec(0.3, 0.25)
        f = frequency(lambda s: tuple(sp_binary_privatize(1, spec, s)) == (0, 1), 10**5, seed=2)
        assert f == pytest.approx(0.25, abs=0.005)

    @pytest.mark.parametrize("pi0,pi_s", [(0.7, 0.4), (-0.1, 0.2)])
    def test_rejects_invalid(self, pi0, pi_s):
        with pytest.raises(InvalidParameters):
            SPBinarySpec(pi0, pi_s)


class TestSamplingPrivacyMulti:
    def test_none_owner_rounds_identical(self):
        spec = SPMultiSpec((0.1, 0.2, 0.25), 0.45)
        for s in streams(0, 5000):
            r = sp_multi_privatize(None, spec, s)
            assert r.round1 == r.round2

    def test_shift_to_truthful_value(self):
        spec = SPMultiSpec((0.1, 0.1, 0.15, 0.2), 0.45)
        law = sp_pair_distribution(spec.face_probs, 3)
        assert law[(0, 3)] == pytest.approx(0.45)
        f = frequency(lambda s: tuple(sp_multi_privatize(3, spec, s)) == (0, 3), 10**5, seed=3)
        assert f == pytest.approx(0.45, abs=0.005)

    @settings(max_examples=30, deadline=None)
    @given(pi0=st.floats(0.01, 0.9), frac=st.floats(0.01, 0.99), truth=st.sampled_from([0, 1]),
           seed=st.integers(0, 2**32))
    def test_v1_reduces_to_binary(self, pi0, frac, truth, seed):
        pi_s = (1 - pi0) * frac
        b = SPBinarySpec(pi0, pi_s)
        m = SPMultiSpec((pi0, 1 - pi0 - pi_s), pi_s)
        law_b = sp_pair_distribution((pi0, 1 - pi0 - pi_s, pi_s), truth)
        law_m = sp_pair_distribution(m.face_probs, truth)
        assert law_b.keys() == law_m.keys()
        for key in law_b:
            assert law_b[key] == pytest.approx(law_m[key])
        # same die order, so identical draws too
        for s1, s2 in zip(streams(seed, 50), streams(seed, 50)):
            assert sp_binary_privatize(truth, b, s1) == sp_multi_privatize(truth or None, m, s2)

    def test_sum_must_be_one(self):
        with pytest.raises(InvalidParameters):
            SPMultiSpec((0.2, 0.2), 0.5)
        SPMultiSpec((0.2, 0.3), 0.5 + 5e-10)

    def test_truth_out_of_range(self):
        spec = SPMultiSpec((0.2, 0.3), 0.5)
        with pytest.raises(InvalidParameters):
            sp_multi_privatize(2, spec, CounterStream(1))

    def test_uniform(self):
        spec = SPMultiSpec.uniform(4, 0.45)
        assert spec.V == 4
        assert spec.pis == pytest.approx((0.11,) * 5)


def test_single_draw_correlation():
    """round1 != round2 only as (0, truth), over 1e5 random owners."""
    rng = np.random.default_rng(8)
    spec = SPMultiSpec((0.15, 0.1, 0.2, 0.1), 0.45)
    for i, s in enumerate(streams(8, 10**5)):
        truth = int(rng.integers(0, 4)) or None
        r = sp_multi_privatize(truth, spec, s)
        if r.round1 != r.round2:
            assert r == (0, truth)


def test_round_one_independent_of_truth():
    spec = SPBinarySpec(0.3, 0.25)
    n = 10**5
    f_yes = np.bincount([sp_binary_privatize(1, spec, s).round1 for s in streams(20, n)], minlength=2) / n
    f_no = np.bincount([sp_binary_privatize(0, spec, s).round1 for s in streams(21, n)], minlength=2) / n
    se = np.sqrt(2 * f_no * (1 - f_no) / n)
    assert np.all(np.abs(f_yes - f_no) < 3 * se)


@pytest.mark.parametrize("mechanism", ["rr", "toy", "noise", "spb", "spm"])
def test_same_stream_same_output(mechanism):
    fns = {
        "rr": lambda s: rr_privatize(1, RRParams(0.5, 0.5), s),
        "toy": lambda s: toy_privatize(0, ToyParams(0.5, 0.5, 0.5), s),
        "noise": lambda s: toy_sample_noise(1, 0.5, s),
        "spb": lambda s: sp_binary_privatize(1, SPBinarySpec(0.2, 0.4), s),
        "spm": lambda s: sp_multi_privatize(2, SPMultiSpec((0.2, 0.1, 0.2), 0.5), s),
    }
    fn = fns[mechanism]
    assert [fn(s) for s in streams(99, 200)] == [fn(s) for s in streams(99, 200)]


def test_numpy_generator_is_accepted():
    rng = np.random.default_rng(0)
    r = sp_binary_privatize(1, SPBinarySpec(0.3, 0.25), rng)
    assert r.round1 in (0, 1)


@given(u=st.floats(0.0, 1.0, exclude_max=True))
def test_draw_face_skips_empty_faces(u):
    cdf = (0.0, 0.5, 0.5, 1.0)
    assert draw_face(cdf, u) in (1, 3)
