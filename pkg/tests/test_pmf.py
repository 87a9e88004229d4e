import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import inarboot as ib
from inarboot.errors import DomainError, ParameterError


class TestConstruction:
    def test_explicit_identity_case(self):
        pmf = ib.explicit_pmf([0.5, 0.5])
        assert pmf[0] == 0.5
        assert pmf[1] == 0.5
        assert pmf.k_max == 1

    def test_explicit_renormalizes(self):
        pmf = ib.explicit_pmf([1.0, 3.0])
        assert pmf[0] == 0.25
        assert pmf[1] == 0.75

    def test_mass_outside_support_is_exactly_zero(self):
        pmf = ib.explicit_pmf([0.5, 0.5])
        assert pmf[2] == 0.0
        assert pmf[-1] == 0.0

    def test_negative_mass_rejected(self):
        with pytest.raises(DomainError):
            ib.explicit_pmf([0.5, -0.1])

    def test_zero_total_mass_rejected(self):
        with pytest.raises(DomainError):
            ib.explicit_pmf([0.0, 0.0])

    @given(st.lists(st.floats(min_value=1e-9, max_value=1e3), min_size=1, max_size=30))
    @settings(max_examples=100)
    def test_construction_idempotent(self, weights):
        first = ib.explicit_pmf(weights)
        again = ib.Pmf(first.probs)
        assert np.all(np.abs(again.probs - first.probs) <= 1e-15)

    @given(st.lists(st.floats(min_value=1e-9, max_value=1e3), min_size=1, max_size=30))
    @settings(max_examples=50)
    def test_sums_to_one(self, weights):
        pmf = ib.explicit_pmf(weights)
        assert abs(pmf.probs.sum() - 1.0) <= 1e-12


class TestFamilies:
    def test_poisson_one_values(self):
        pmf = ib.poisson_pmf(1.0, tail_tol=1e-12)
        assert pmf[0] == pytest.approx(math.exp(-1), rel=1e-9)
        assert pmf[1] == pytest.approx(math.exp(-1), rel=1e-9)
        assert pmf[4] == pytest.approx(math.exp(-1) / 24, rel=1e-9)
        assert round(pmf[4], 3) == 0.015

    def test_poisson_tail_below_tolerance(self):
        raw = ib.poisson_pmf(3.0, tail_tol=1e-9)
        from scipy import stats

        assert stats.poisson(3.0).sf(raw.k_max) < 1e-9
        # smallest such prefix: one entry fewer would leave too much tail
        assert stats.poisson(3.0).sf(raw.k_max - 1) >= 1e-9

    def test_negbin_moments_brute_force(self):
        pmf = ib.negbin_pmf(2, 2.0 / 3.0)
        ks = np.arange(len(pmf))
        mean = float(ks @ pmf.probs)
        var = float((ks - mean) ** 2 @ pmf.probs)
        assert mean == pytest.approx(1.0, abs=1e-9)
        assert var == pytest.approx(1.5, abs=1e-9)

    def test_geometric_values(self):
        pmf = ib.geometric_pmf(0.5)
        assert pmf[0] == pytest.approx(0.5, rel=1e-9)
        assert pmf[3] == pytest.approx(0.5**4, rel=1e-9)

    @pytest.mark.parametrize(
        "family,params",
        [("poisson", [0.0]), ("poisson", [-1.0]), ("negbin", [0, 0.5]),
         ("negbin", [2, 1.5]), ("geometric", [0.0]), ("geometric", [1.0])],
    )
    def test_parameter_domain_errors(self, family, params):
        with pytest.raises(ParameterError):
            ib.make_pmf(family, params)

    def test_tail_tol_domain(self):
        with pytest.raises(ParameterError):
            ib.poisson_pmf(1.0, tail_tol=1e-3)
        with pytest.raises(ParameterError):
            ib.poisson_pmf(1.0, tail_tol=0.0)

    def test_make_pmf_dispatch(self):
        assert ib.make_pmf("poisson", [1.0])[0] == pytest.approx(math.exp(-1), rel=1e-9)
        assert ib.make_pmf("explicit", [0.5, 0.5])[1] == 0.5
        assert ib.make_pmf("negbin", [2, 2.0 / 3.0]).mean() == pytest.approx(1.0, abs=1e-9)
        with pytest.raises(ParameterError):
            ib.make_pmf("cauchy", [1.0])
        with pytest.raises(ParameterError):
            ib.make_pmf("poisson", [1.0, 2.0])
        with pytest.raises(ParameterError):
            ib.make_pmf("negbin", [2.5, 0.5])


class TestSampling:
    def test_sample_within_support(self):
        pmf = ib.explicit_pmf([0.2, 0.5, 0.3])
        draws = pmf.sample(10000, ib.SeedSpec(1))
        assert draws.min() >= 0
        assert draws.max() <= 2

    def test_sample_deterministic(self):
        pmf = ib.poisson_pmf(2.0)
        a = pmf.sample(1000, ib.SeedSpec(7, (1, 2)))
        b = pmf.sample(1000, ib.SeedSpec(7, (1, 2)))
        assert np.array_equal(a, b)

    def test_sample_frequencies(self):
        pmf = ib.explicit_pmf([0.25, 0.75])
        draws = pmf.sample(100_000, ib.SeedSpec(3))
        freq = np.mean(draws == 1)
        assert abs(freq - 0.75) < 3 * math.sqrt(0.25 * 0.75 / 100_000)

    def test_moments(self):
        pmf = ib.explicit_pmf([0.5, 0.5])
        assert pmf.mean() == 0.5
        assert pmf.variance() == 0.25
