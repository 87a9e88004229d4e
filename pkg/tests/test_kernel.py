import math

import numpy as np
import pytest

import inarboot as ib
from inarboot.errors import ConditioningError, ParameterError
from inarboot.kernel import TransitionQuery, binom_pmf_vector

from conftest import random_small_model, random_series_for


def hand_model():
    """alpha=0.5 with G uniform on {0,1}; every value checkable by hand."""
    return ib.InarModel((0.5,), ib.explicit_pmf([0.5, 0.5]))


class TestTransitionProbability:
    def test_zero_past_returns_innovation_mass(self):
        model = ib.InarModel((0.37,), ib.poisson_pmf(1.0))
        for k in range(5):
            q = TransitionQuery((0,), k)
            assert ib.transition_probability(model, q) == pytest.approx(
                model.innovations[k], abs=1e-15
            )

    def test_hand_convolution(self):
        # survivors j in {0,1}: 0.5*0.5 + 0.5*0.5 = 0.5
        assert ib.transition_probability(hand_model(), TransitionQuery((1,), 1)) == pytest.approx(
            0.5, abs=1e-15
        )

    def test_unreachable_value_is_zero(self):
        model = hand_model()
        # past 1, G on {0,1}: max reachable is 2
        assert ib.transition_probability(model, TransitionQuery((1,), 3)) == 0.0

    def test_normalization_random_models(self):
        rng = np.random.default_rng(101)
        for _ in range(100):
            model = random_small_model(rng)
            past = tuple(int(v) for v in rng.integers(0, 6, size=model.p))
            reachable = sum(past) + model.innovations.k_max
            total = math.fsum(
                ib.transition_probability(model, TransitionQuery(past, x))
                for x in range(reachable + 1)
            )
            assert abs(total - 1.0) < 1e-10

    def test_direct_inar1_path_agrees_with_convolution(self):
        rng = np.random.default_rng(102)
        for _ in range(200):
            model = random_small_model(rng, p=1)
            x_prev = int(rng.integers(0, 12))
            x_cur = int(rng.integers(0, 12))
            conv = ib.transition_probability(model, TransitionQuery((x_prev,), x_cur))
            direct = ib.transition_probability_inar1(
                x_prev, x_cur, model.alphas[0], model.innovations
            )
            assert abs(conv - direct) < 1e-14

    def test_query_validation(self):
        model = hand_model()
        with pytest.raises(ParameterError):
            ib.transition_probability(model, TransitionQuery((1, 2), 1))
        with pytest.raises(ParameterError):
            TransitionQuery((-1,), 0)
        with pytest.raises(ParameterError):
            TransitionQuery((1,), -2)


class TestConditionalLogLikelihood:
    def test_single_no_survivor_transition(self):
        model = ib.InarModel((0.4,), ib.poisson_pmf(1.0))
        series = ib.CountSeries([0], [2])
        expected = -1.0 - math.log(2.0)
        assert ib.conditional_log_likelihood(model, series) == pytest.approx(expected, abs=1e-9)

    def test_constant_probability_sum(self):
        model = hand_model()
        series = ib.CountSeries([1], [1, 1, 1, 1])
        assert ib.conditional_log_likelihood(model, series) == pytest.approx(
            4 * math.log(0.5), abs=1e-12
        )

    def test_compositional_oracle(self):
        rng = np.random.default_rng(103)
        for _ in range(10):
            model = random_small_model(rng)
            series = random_series_for(model, rng, n_body=25)
            values = series.values()
            total = 0.0
            for t in range(series.n + 1):
                idx = model.p + t
                past = tuple(int(values[idx - i]) for i in range(1, model.p + 1))
                total += math.log(
                    ib.transition_probability(model, TransitionQuery(past, int(values[idx])))
                )
            assert ib.conditional_log_likelihood(model, series) == pytest.approx(total, abs=1e-12)

    def test_minus_infinity_sentinel(self):
        model = ib.InarModel((0.5,), ib.explicit_pmf([1.0]))
        series = ib.CountSeries([0], [1])
        assert ib.conditional_log_likelihood(model, series) == -math.inf


class TestInnovationPosterior:
    def test_zero_past_point_mass(self):
        model = ib.InarModel((0.8,), ib.poisson_pmf(2.0))
        post = ib.innovation_posterior(model, TransitionQuery((0,), 3))
        assert post[3] == 1.0
        assert post[2] == 0.0

    def test_hand_posterior(self):
        post = ib.innovation_posterior(hand_model(), TransitionQuery((1,), 1))
        assert post[0] == pytest.approx(0.5, abs=1e-12)
        assert post[1] == pytest.approx(0.5, abs=1e-12)

    def test_normalizes(self):
        rng = np.random.default_rng(104)
        for _ in range(100):
            model = random_small_model(rng, p=1)
            x_prev = int(rng.integers(0, 8))
            x_cur = int(rng.integers(0, model.innovations.k_max + x_prev + 1))
            q = TransitionQuery((x_prev,), x_cur)
            if ib.transition_probability(model, q) <= 0:
                continue
            post = ib.innovation_posterior(model, q)
            assert abs(post.probs.sum() - 1.0) < 1e-12

    def test_joint_reconstructs_transition(self):
        rng = np.random.default_rng(105)
        for _ in range(100):
            model = random_small_model(rng, p=1)
            x_prev = int(rng.integers(0, 8))
            x_cur = int(rng.integers(0, model.innovations.k_max + x_prev + 1))
            q = TransitionQuery((x_prev,), x_cur)
            prob = ib.transition_probability(model, q)
            if prob <= 0:
                continue
            b = binom_pmf_vector(x_prev, model.alphas[0])
            joint = [
                model.innovations[j] * b[x_cur - j]
                for j in range(max(0, x_cur - x_prev), x_cur + 1)
            ]
            assert abs(math.fsum(joint) - prob) < 1e-12

    def test_zero_probability_conditioning(self):
        model = ib.InarModel((0.5,), ib.explicit_pmf([1.0]))
        with pytest.raises(ConditioningError):
            ib.innovation_posterior(model, TransitionQuery((0,), 2))

    def test_requires_order_one(self):
        model = ib.InarModel((0.3, 0.2), ib.poisson_pmf(1.0))
        with pytest.raises(ParameterError):
            ib.innovation_posterior(model, TransitionQuery((1, 1), 1))


class TestConditionalExpectation:
    def test_constant_function(self):
        model = ib.InarModel((0.5,), ib.poisson_pmf(1.0))
        q = TransitionQuery((3,), 2)
        assert ib.conditional_expectation_A(model, lambda j: 1.0, q) == pytest.approx(1.0, abs=1e-12)
        assert ib.conditional_expectation_A(model, lambda j: -2.5, q) == pytest.approx(-2.5, abs=1e-12)

    def test_indicator_recovers_posterior(self):
        model = ib.InarModel((0.5,), ib.poisson_pmf(1.0))
        q = TransitionQuery((3,), 2)
        post = ib.innovation_posterior(model, q)
        for k in range(3):
            val = ib.conditional_expectation_A(model, lambda j, k=k: 1.0 if j == k else 0.0, q)
            assert val == pytest.approx(post[k], abs=1e-12)

    def test_identity_hand_value(self):
        assert ib.conditional_expectation_A(
            hand_model(), lambda j: float(j), TransitionQuery((1,), 1)
        ) == pytest.approx(0.5, abs=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(106)
        model = random_small_model(rng, p=1)
        q = TransitionQuery((4,), 3)
        h1 = lambda j: float(j)
        h2 = lambda j: float(j * j - 1)
        lhs = ib.conditional_expectation_A(model, lambda j: 2.0 * h1(j) - 0.5 * h2(j), q)
        rhs = 2.0 * ib.conditional_expectation_A(model, h1, q) - 0.5 * ib.conditional_expectation_A(
            model, h2, q
        )
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_bounded_by_sup(self):
        rng = np.random.default_rng(107)
        for _ in range(50):
            model = random_small_model(rng, p=1)
            x_prev = int(rng.integers(0, 6))
            x_cur = int(rng.integers(0, model.innovations.k_max + x_prev + 1))
            q = TransitionQuery((x_prev,), x_cur)
            if ib.transition_probability(model, q) <= 0:
                continue
            h = lambda j: math.sin(float(j))
            assert abs(ib.conditional_expectation_A(model, h, q)) <= 1.0 + 1e-12


class TestScoreAlpha:
    def test_zero_past_has_zero_score(self):
        # all-zero pasts: the thinning never fires, so alpha drops out
        model = ib.InarModel((0.5,), ib.poisson_pmf(1.0))
        series = ib.CountSeries([0], [0, 0, 0, 0])
        assert np.allclose(ib.score_alpha(model, series), 0.0)

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(108)
        step = 1e-6
        for _ in range(50):
            model = random_small_model(rng)
            series = random_series_for(model, rng, n_body=20)
            n = max(series.n, 1)
            score = ib.score_alpha(model, series)
            for i in range(model.p):
                up = list(model.alphas)
                dn = list(model.alphas)
                up[i] += step
                dn[i] -= step
                m_up = ib.InarModel(tuple(up), model.innovations)
                m_dn = ib.InarModel(tuple(dn), model.innovations)
                fd = (
                    ib.conditional_log_likelihood(m_up, series)
                    - ib.conditional_log_likelihood(m_dn, series)
                ) / (2 * step * n)
                assert score[i] == pytest.approx(fd, abs=1e-4)

    def test_zero_at_interior_profile_maximum(self):
        from scipy import optimize

        pmf = ib.poisson_pmf(1.0)
        series = ib.simulate_inar(ib.InarModel((0.5,), pmf), 300, 200, ib.SeedSpec(55))

        def profile_negll(a):
            return -ib.conditional_log_likelihood(ib.InarModel((float(a),), pmf), series)

        res = optimize.minimize_scalar(profile_negll, bounds=(0.01, 0.99), method="bounded",
                                       options={"xatol": 1e-10})
        best = ib.InarModel((float(res.x),), pmf)
        assert abs(ib.score_alpha(best, series)[0]) < 1e-6

    def test_zero_probability_transitions_contribute_nothing(self):
        model = ib.InarModel((0.5,), ib.explicit_pmf([1.0]))
        series = ib.CountSeries([0], [1, 0])
        # first transition impossible under point mass; second is fine
        score = ib.score_alpha(model, series)
        assert np.all(np.isfinite(score))


class TestSupportBounds:
    def test_constant_series(self):
        s = ib.CountSeries([4], [4, 4, 4])
        sb = ib.support_bounds(s, 1)
        assert (sb.u_minus, sb.u_plus) == (0, 4)

    def test_hand_case(self):
        s = ib.CountSeries([2], [1, 3, 0])
        sb = ib.support_bounds(s, 1)
        assert (sb.u_minus, sb.u_plus) == (0, 3)

    def test_strictly_increasing_series_positive_u_minus(self):
        s = ib.CountSeries([0], [1, 2, 3, 4])
        sb = ib.support_bounds(s, 1)
        assert sb.u_minus >= 1
        assert sb.u_plus == 4

    def test_brute_force_random(self):
        rng = np.random.default_rng(109)
        for _ in range(50):
            p = int(rng.integers(1, 3))
            vals = rng.integers(0, 7, size=int(rng.integers(p + 2, 20)))
            s = ib.CountSeries(vals[:p], vals[p:])
            sb = ib.support_bounds(s, p)
            diffs = [
                int(vals[i]) - int(vals[i - p : i].sum()) for i in range(p, len(vals))
            ]
            assert sb.u_minus == max(0, min(diffs))
            assert sb.u_plus == max(vals[p:])
