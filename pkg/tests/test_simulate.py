import math

import numpy as np
import pytest
from scipy import stats

import inarboot as ib
from inarboot.errors import ParameterError


def _chi_square_ok(observed_counts, expected_probs, n_draws, level=0.001):
    """Goodness-of-fit with bins of expected count >= 5 (tail bins merged)."""
    expected = expected_probs * n_draws
    obs, exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed_counts, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp:
        obs[-1] += acc_o
        exp[-1] += acc_e
    exp = np.asarray(exp) * (sum(obs) / sum(exp))
    _, pvalue = stats.chisquare(obs, exp)
    return pvalue > level


class TestBinomialThinning:
    def test_thinning_of_zero(self):
        assert ib.binomial_thinning(0.5, 0, ib.SeedSpec(1)) == 0

    def test_result_never_exceeds_input(self):
        gen = ib.SeedSpec(2).generator()
        for x in (1, 3, 7):
            for _ in range(200):
                assert 0 <= ib.binomial_thinning(0.7, x, gen) <= x

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.3])
    def test_alpha_domain(self, alpha):
        with pytest.raises(ParameterError):
            ib.binomial_thinning(alpha, 3, ib.SeedSpec(1))

    def test_negative_count_rejected(self):
        with pytest.raises(ParameterError):
            ib.binomial_thinning(0.5, -1, ib.SeedSpec(1))

    def test_empirical_mean_binomial(self):
        gen = ib.SeedSpec(3).generator()
        draws = np.array([ib.binomial_thinning(0.5, 4, gen) for _ in range(100_000)])
        sigma = math.sqrt(4 * 0.25 / 100_000)
        assert abs(draws.mean() - 2.0) < 3 * sigma

    def test_empirical_bernoulli(self):
        gen = ib.SeedSpec(4).generator()
        draws = np.array([ib.binomial_thinning(0.9, 1, gen) for _ in range(100_000)])
        freq = draws.mean()
        assert abs(freq - 0.9) < 3 * math.sqrt(0.09 / 100_000)

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("x", [1, 4, 10])
    def test_distribution_chi_square(self, alpha, x):
        gen = ib.SeedSpec(hash((alpha, x)) % 2**32).generator()
        n = 100_000
        draws = np.array([ib.binomial_thinning(alpha, x, gen) for _ in range(n)])
        counts = np.bincount(draws, minlength=x + 1)
        probs = stats.binom.pmf(np.arange(x + 1), x, alpha)
        assert _chi_square_ok(counts, probs, n)


class TestSimulateInar:
    def test_point_mass_at_zero_absorbs(self):
        model = ib.InarModel((0.5,), ib.explicit_pmf([1.0]))
        s = ib.simulate_inar(model, 200, 100, ib.SeedSpec(5))
        assert np.all(s.body == 0)
        assert np.all(s.presample == 0)

    def test_poisson_stationary_mean(self, poi_model):
        s = ib.simulate_inar(poi_model, 100_000, 500, ib.SeedSpec(6))
        # marginal variance 2, lag-1 correlation 0.5 inflate the mean's variance
        sigma = math.sqrt(2.0 * 3.0 / 100_000)
        assert abs(s.body.mean() - 2.0) < 3 * sigma

    def test_lag_one_autocorrelation(self):
        model = ib.InarModel((0.3,), ib.poisson_pmf(1.0))
        s = ib.simulate_inar(model, 100_000, 500, ib.SeedSpec(7))
        x = s.body.astype(float)
        xc = x - x.mean()
        rho1 = (xc[:-1] @ xc[1:]) / (xc @ xc)
        assert abs(rho1 - 0.3) < 0.02

    def test_shapes_and_presample(self, poi_model):
        s = ib.simulate_inar(poi_model, 99, 50, ib.SeedSpec(8))
        assert s.body.size == 100
        assert s.presample.size == 1

    def test_boundary_alpha_rejected(self, poi_model):
        bad = ib.InarModel((0.0,), ib.poisson_pmf(1.0))
        with pytest.raises(ParameterError):
            ib.simulate_inar(bad, 10, 10, ib.SeedSpec(1))
        explosive = ib.InarModel((0.6, 0.4), ib.poisson_pmf(1.0))
        with pytest.raises(ParameterError):
            ib.simulate_inar(explosive, 10, 10, ib.SeedSpec(1))

    def test_near_zero_alpha_marginals_match_innovations(self):
        pmf = ib.poisson_pmf(1.0)
        model = ib.InarModel((1e-6,), pmf)
        n = 100_000
        s = ib.simulate_inar(model, n, 100, ib.SeedSpec(9))
        counts = np.bincount(s.body, minlength=len(pmf))
        probs = np.append(pmf.probs, np.zeros(max(0, counts.size - len(pmf))))
        assert _chi_square_ok(counts, probs, n)

    def test_determinism_byte_identical(self, poi_model):
        a = ib.simulate_inar(poi_model, 500, 500, ib.SeedSpec(10, (4, 2)))
        b = ib.simulate_inar(poi_model, 500, 500, ib.SeedSpec(10, (4, 2)))
        assert a == b
        c = ib.simulate_inar(poi_model, 500, 500, ib.SeedSpec(10, (4, 3)))
        assert a != c

    def test_order_two_runs(self):
        model = ib.InarModel((0.3, 0.2), ib.poisson_pmf(1.0))
        s = ib.simulate_inar(model, 5_000, 200, ib.SeedSpec(11))
        assert s.presample.size == 2
        # stationary mean lam / (1 - a1 - a2) = 2
        assert abs(s.body.mean() - 2.0) < 0.15


class TestSimulateInarch:
    def test_alpha_zero_is_iid_poisson(self):
        s = ib.simulate_inarch(0.0, 1.0, 100_000, 100, ib.SeedSpec(12))
        assert abs(s.body.mean() - 1.0) < 3 * math.sqrt(1.0 / 100_000)

    def test_stationary_mean(self):
        s = ib.simulate_inarch(0.5, 1.0, 100_000, 500, ib.SeedSpec(13))
        sigma = math.sqrt((8.0 / 3.0) * 3.0 / 100_000)
        assert abs(s.body.mean() - 2.0) < 3 * sigma

    def test_overdispersed_marginals(self):
        # conditional-Poisson feedback overdisperses the marginal law
        for seed in range(20):
            s = ib.simulate_inarch(0.5, 1.0, 5_000, 500, ib.SeedSpec(14, (seed,)))
            assert s.body.var() > s.body.mean()

    def test_parameter_domain(self):
        with pytest.raises(ParameterError):
            ib.simulate_inarch(1.0, 1.0, 10, 10, ib.SeedSpec(1))
        with pytest.raises(ParameterError):
            ib.simulate_inarch(0.5, 0.0, 10, 10, ib.SeedSpec(1))

    def test_determinism(self):
        a = ib.simulate_inarch(0.5, 1.0, 300, 100, ib.SeedSpec(15))
        b = ib.simulate_inarch(0.5, 1.0, 300, 100, ib.SeedSpec(15))
        assert a == b
