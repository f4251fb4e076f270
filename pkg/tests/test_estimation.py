import math

import numpy as np
import pytest
from scipy import stats

from oracles import binomial_pmf, rr_expected_yes, sp_binary_expected
from sampling_privacy.estimation import (
    CountTable,
    Estimate,
    rr_estimate,
    sp_binary_estimate,
    sp_multi_estimate,
    toy_estimate,
)
from sampling_privacy.exceptions import InvalidParameters, MalformedCounts
from sampling_privacy.mechanisms import RRParams, SPBinarySpec, SPMultiSpec, ToyParams
from sampling_privacy.simulation import PopulationSpec, simulate_estimates, trial_tables


class TestCountTable:
    def test_validation(self):
        with pytest.raises(MalformedCounts):
            CountTable([[1, -1]])
        with pytest.raises(MalformedCounts):
            CountTable([[1.5, 2]])
        with pytest.raises(MalformedCounts):
            CountTable([[1], [2], [3]])

    def test_sum_and_totals(self):
        t = CountTable([[1, 2], [3, 0]]) + CountTable([[0, 1], [1, 0]])
        assert t == CountTable([[1, 3], [4, 0]])
        assert t.round_total(1) == 4
        assert CountTable([[2, 3]], absent=5).round_total(1) == 10


class TestRR:
    @pytest.mark.parametrize("yes_count", [55, 56])
    def test_worked_example(self, yes_count):
        # expected privatized sum for 60 truthful Yes out of 100 is 0.51*100 + 0.045*100
        assert rr_expected_yes(60, 100, 0.85, 0.3) == pytest.approx(55.5)
        est = rr_estimate(yes_count, 100, RRParams(0.85, 0.3))
        assert abs(est.value - 60) <= 0.5 / 0.85 + 1e-9

    def test_expected_sum_inverts_exactly(self):
        p = RRParams(0.85, 0.3)
        # 60 Yes of 200: E = 0.85*60 + 0.045*200 = 60 exactly
        assert rr_estimate(60, 200, p).value == pytest.approx(60.0)

    def test_pure_noise(self):
        assert rr_estimate(9, 200, RRParams(0.85, 0.3)).value == pytest.approx(0.0)

    def test_no_privatization(self):
        assert rr_estimate(100, 100, RRParams(1.0, 0.3)).value == 100

    @pytest.mark.parametrize("yes,n", [(-1, 10), (11, 10), (0, 0)])
    def test_bad_counts(self, yes, n):
        with pytest.raises(InvalidParameters):
            rr_estimate(yes, n, RRParams(0.5, 0.5))

    def test_negative_estimates_are_reported_raw(self):
        est = rr_estimate(0, 1000, RRParams(0.85, 0.3))
        assert est.value < 0
        assert est.clamped == 0.0


class TestToy:
    def test_worked_example(self):
        p = ToyParams(0.5, 0.6, 0.5)
        assert toy_estimate(22, 100, p).value == pytest.approx(40.0)

    def test_noise_only(self):
        assert toy_estimate(10, 100, ToyParams(0.5, 0.6, 0.5)).value == pytest.approx(0.0)

    def test_reduces_to_truthful_sampling(self):
        assert toy_estimate(30, 100, ToyParams(1.0, 0.6, 0.0)).value == pytest.approx(50.0)

    def test_degenerate(self):
        with pytest.raises(InvalidParameters):
            toy_estimate(3, 10, ToyParams(0.5, 0.0, 0.5))


class TestSPBinary:
    def test_direct(self):
        t = CountTable([[45, 55], [27, 73]])
        assert sp_binary_estimate(t, SPBinarySpec(0.3, 0.45)).value == pytest.approx(40.0)

    def test_equal_rounds(self):
        t = CountTable([[5, 5], [5, 5]])
        assert sp_binary_estimate(t, SPBinarySpec(0.3, 0.45)).value == 0.0

    def test_expected_values_invert(self):
        # Total=10, Yes=3, pi0=0.2, pi_s=0.4 gives E[1_1]=4, E[1_2]=5.2; scaled x5 to integers
        e11, e12 = sp_binary_expected(10, 3, 0.2, 0.4)
        assert (e11, e12) == (pytest.approx(4.0), pytest.approx(5.2))
        t = CountTable([[50 - 20, 20], [50 - 26, 26]])
        assert sp_binary_estimate(t, SPBinarySpec(0.2, 0.4)).value == pytest.approx(15.0)

    def test_malformed(self):
        with pytest.raises(MalformedCounts):
            sp_binary_estimate(CountTable([[1, 2]]), SPBinarySpec(0.3, 0.45))
        with pytest.raises(MalformedCounts):
            sp_binary_estimate(CountTable([[1, 2, 3], [1, 2, 3]]), SPBinarySpec(0.3, 0.45))


class TestSPMulti:
    def test_identical_rounds(self):
        spec = SPMultiSpec.uniform(3, 0.45)
        est = sp_multi_estimate(CountTable([[4, 3, 2, 1], [4, 3, 2, 1]]), spec)
        np.testing.assert_array_equal(est.per_output, np.zeros(3))
        assert est.value == 0.0

    def test_v1_matches_binary(self):
        t = CountTable([[45, 55], [27, 73]])
        m = sp_multi_estimate(t, SPMultiSpec((0.3, 0.25), 0.45))
        b = sp_binary_estimate(t, SPBinarySpec(0.3, 0.45))
        assert m.value == b.value
        assert m.for_value(1) == b.value

    def test_expected_values_invert(self):
        # Total=1000, Yes at v=2 is 50, pi_s=0.45: E[diff at 2] = 22.5; scaled x2
        spec = SPMultiSpec.uniform(3, 0.45)
        base = np.array([600, 500, 500, 400])
        r1 = base.copy()
        r2 = base.copy()
        r1[0] += 45
        r2[2] += 45
        est = sp_multi_estimate(CountTable([r1, r2]), spec)
        assert est.for_value(2) == pytest.approx(100.0)
        assert est.per_output_clamped[0] == 0.0

    def test_per_output_only_for_multi(self):
        assert Estimate(1.0).per_output is None


def test_binomial_difference_law():
    """count[r2][v] - count[r1][v] ~ Binomial(Yes_v, pi_s): chi-squared GOF."""
    yes, pi_s = (12, 30), 0.45
    spec = SPMultiSpec((0.2, 0.15, 0.2), pi_s)
    tables = trial_tables(PopulationSpec(yes, 150), spec, 10**4, master_seed=5)
    diffs = np.array([t.counts[1, 1:] - t.counts[0, 1:] for t in tables])
    for v, n in enumerate(yes):
        observed = np.bincount(diffs[:, v], minlength=n + 1)
        expected = np.array([binomial_pmf(n, pi_s, k) for k in range(n + 1)]) * len(tables)
        # pool tails so every cell expects at least 5
        keep = expected >= 5
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        if exp[-1] == 0:
            obs, exp = obs[:-1], exp[:-1]
        p = stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue
        assert p > 0.001, (v, p)


@pytest.mark.parametrize("seed", range(3))
def test_unbiased_sp_binary(seed):
    yes, trials = 80, 1000
    spec = SPBinarySpec(0.3, 0.45)
    est = simulate_estimates(PopulationSpec.binary(yes, 5000), spec, trials, seed)[:, 0]
    sigma = math.sqrt(yes * (1 - spec.pi_s) / spec.pi_s)
    assert abs(est.mean() - yes) < 3 * sigma / math.sqrt(trials)


def test_constant_error_as_no_population_grows():
    spec = SPBinarySpec(0.3, 0.45)
    sds = [
        simulate_estimates(PopulationSpec.binary(100, no), spec, 1000, 11)[:, 0].std(ddof=1)
        for no in (10**3, 10**4, 10**5)
    ]
    for a in sds:
        for b in sds:
            assert abs(a - b) / max(a, b) < 0.15


def test_rr_noise_grows_with_population():
    """Raw Yes-count spread of an all-No population at pi1=0.85, pi2=0.3 (N=1e4)."""
    tables = trial_tables(PopulationSpec.binary(0, 10**4), RRParams(0.85, 0.3), 1000, 3)
    sd = np.std([t.count(1, 1) for t in tables], ddof=1)
    assert sd == pytest.approx(21.2, rel=0.10)


def test_sp_estimators_ignore_population_size():
    t = CountTable([[10, 5], [1, 14]])
    spec = SPBinarySpec(0.3, 0.45)
    # padding round totals with extra identical output-0 owners changes nothing
    t_big = CountTable([[10_010, 5], [10_001, 14]])
    assert sp_binary_estimate(t, spec).value == sp_binary_estimate(t_big, spec).value
