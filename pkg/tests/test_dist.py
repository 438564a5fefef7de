"""Distribution families: moments, excess formulas, sampling.

The closed-form excess mean and excess second moment are checked against
adaptive quadrature of the density on a randomized parameter grid, the
two mixed-Erlang formulations against each other, and the samplers
against their own closed-form moments.
"""

import math

import numpy as np
import pytest

from apptsched.dist import (
    HyperExp,
    LogNormalDist,
    MixedErlang,
    WeibullDist,
    excess_mean_quadrature,
    excess_second_moment_quadrature,
    loss_summand,
    loss_summand_closed_form,
    sample,
)
from apptsched.errors import DomainError

# quadrature of int_0^inf y f(y+x) dy for ME(0.3, 3, 2) at x=0.8
ME_EXCESS_MEAN_0p8 = 0.6375892038271218
# quadrature of int_0^inf y^2 f(y+x) dy for the same fit and threshold
ME_EXCESS_2ND_0p8 = 0.9929270754977154
# 0.5 e^-1 + 0.25 e^-2, cross-checked by quadrature
HE_EXCESS_1 = 0.21777354139487434


def _random_fits(seed: int, count: int):
    """A spread of fits across all four families and realistic moment ranges."""
    rng = np.random.default_rng(seed)
    fits = []
    makers = (
        lambda: HyperExp(float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.3, 4.0)),
                         float(rng.uniform(0.3, 4.0))),
        lambda: MixedErlang(float(rng.uniform(0.0, 1.0)), int(rng.integers(2, 15)),
                            float(rng.uniform(0.3, 5.0))),
        lambda: WeibullDist(float(rng.uniform(0.3, 3.0)), float(rng.uniform(0.6, 4.0))),
        lambda: LogNormalDist(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.05, 1.5))),
    )
    for i in range(count):
        fits.append(makers[i % 4]())
    return fits, rng


class TestMoments:
    def test_he_mean_exponential_case(self):
        assert HyperExp(0.5, 2.0, 2.0).mean() == pytest.approx(0.5, rel=1e-14)

    def test_he_variance_exponential_case(self):
        assert HyperExp(0.5, 2.0, 2.0).variance() == pytest.approx(0.25, rel=1e-14)

    def test_me_erlang_moments(self):
        fit = MixedErlang(0.0, 2, 2.0)
        assert fit.mean() == pytest.approx(1.0, rel=1e-14)
        assert fit.variance() == pytest.approx(0.5, rel=1e-14)

    def test_ln_moments(self):
        fit = LogNormalDist(-0.5, 1.0)
        assert fit.mean() == pytest.approx(1.0, rel=1e-14)
        assert fit.variance() == pytest.approx(math.e - 1.0, rel=1e-13)

    def test_weibull_exponential_case(self):
        fit = WeibullDist(1.0, 1.0)
        assert fit.mean() == pytest.approx(1.0, rel=1e-13)
        assert fit.variance() == pytest.approx(1.0, rel=1e-13)

    def test_moments_match_quadrature(self):
        from scipy import integrate

        fits, _ = _random_fits(3, 12)
        for fit in fits:
            mean, _ = integrate.quad(lambda y: y * fit.pdf(y), 0, math.inf,
                                     limit=400, epsabs=1e-13, epsrel=1e-11)
            assert fit.mean() == pytest.approx(mean, rel=1e-9)


class TestExcessMean:
    def test_at_zero_equals_mean(self):
        fits, _ = _random_fits(5, 16)
        for fit in fits:
            assert fit.excess_mean(0.0) == pytest.approx(fit.mean(), rel=1e-12)

    def test_he_value(self):
        assert HyperExp(0.5, 1.0, 2.0).excess_mean(1.0) == pytest.approx(HE_EXCESS_1, rel=1e-13)

    def test_weibull_memoryless_case(self):
        assert WeibullDist(1.0, 1.0).excess_mean(0.3) == pytest.approx(math.exp(-0.3), rel=1e-12)

    def test_me_quadrature_value(self):
        assert MixedErlang(0.3, 3, 2.0).excess_mean(0.8) == pytest.approx(
            ME_EXCESS_MEAN_0p8, rel=1e-9
        )

    def test_matches_quadrature_grid(self):
        fits, rng = _random_fits(17, 24)
        for fit in fits:
            for x in (0.0, 0.5 * fit.mean(), fit.mean(), 2.5 * fit.mean()):
                want = excess_mean_quadrature(fit, x)
                assert fit.excess_mean(x) == pytest.approx(want, rel=1e-8)

    def test_nonincreasing_and_convex(self):
        fits, _ = _random_fits(23, 16)
        for fit in fits:
            xs = np.linspace(0.0, 4.0 * fit.mean(), 60)
            vals = [fit.excess_mean(float(x)) for x in xs]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
            second = [vals[i - 1] - 2 * vals[i] + vals[i + 1] for i in range(1, len(vals) - 1)]
            assert all(s >= -1e-9 for s in second)

    def test_jensen_lower_bound(self):
        fits, _ = _random_fits(29, 16)
        for fit in fits:
            for x in (0.0, 0.3, 1.1, 2.7):
                assert fit.excess_mean(x) >= max(0.0, fit.mean() - x) - 1e-12

    def test_negative_threshold_rejected(self):
        with pytest.raises(DomainError):
            HyperExp(0.5, 1.0, 1.0).excess_mean(-0.1)


class TestMixedErlangSecondMoment:
    def test_erlang_at_zero(self):
        # E X^2 = k (k + 1 - 2p) / mu^2
        assert MixedErlang(0.0, 2, 1.0).excess_second_moment(0.0) == pytest.approx(6.0, rel=1e-12)

    def test_exponential_at_zero(self):
        assert MixedErlang(1.0, 2, 1.0).excess_second_moment(0.0) == pytest.approx(2.0, rel=1e-12)

    def test_quadrature_value(self):
        assert MixedErlang(0.3, 3, 2.0).excess_second_moment(0.8) == pytest.approx(
            ME_EXCESS_2ND_0p8, rel=1e-9
        )

    def test_both_forms_agree(self):
        rng = np.random.default_rng(31)
        for _ in range(120):
            fit = MixedErlang(float(rng.uniform(0, 1)), int(rng.integers(2, 40)),
                              float(rng.uniform(0.2, 5.0)))
            x = float(rng.uniform(0.0, 3.0 * fit.mean()))
            direct = fit.excess_second_moment(x)
            phase = fit.excess_second_moment_phase_form(x)
            assert direct == pytest.approx(phase, rel=1e-10, abs=1e-280)

    def test_mean_forms_agree(self):
        rng = np.random.default_rng(37)
        for _ in range(120):
            fit = MixedErlang(float(rng.uniform(0, 1)), int(rng.integers(2, 40)),
                              float(rng.uniform(0.2, 5.0)))
            x = float(rng.uniform(0.0, 3.0 * fit.mean()))
            assert fit.excess_mean(x) == pytest.approx(
                fit.excess_mean_phase_form(x), rel=1e-10, abs=1e-280
            )


class TestExcessSecondMomentAllFamilies:
    def test_matches_quadrature_grid(self):
        fits, _ = _random_fits(41, 20)
        for fit in fits:
            for x in (0.0, 0.6 * fit.mean(), 1.7 * fit.mean()):
                want = excess_second_moment_quadrature(fit, x)
                assert fit.excess_second_moment(x) == pytest.approx(want, rel=1e-8)


class TestLossSummand:
    def test_at_zero(self):
        fits, _ = _random_fits(43, 8)
        for fit in fits:
            assert loss_summand(fit, 0.0, 0.5) == pytest.approx(0.5 * fit.mean(), rel=1e-12)

    def test_he_example(self):
        fit = HyperExp(0.5, 1.0, 2.0)
        want = HE_EXCESS_1 + 0.5 * (1.0 - 0.75)
        assert loss_summand(fit, 1.0, 0.5) == pytest.approx(want, rel=1e-13)

    def test_weibull_zero_weight(self):
        assert loss_summand(WeibullDist(1.0, 1.0), 0.3, 0.0) == pytest.approx(
            math.exp(-0.3), rel=1e-12
        )

    def test_closed_forms_match_composition(self):
        fits, rng = _random_fits(47, 24)
        for fit in fits:
            for x in (0.0, 0.4, 1.3, 3.8):
                for omega in (0.0, 0.3, 0.5, 1.0):
                    assert loss_summand_closed_form(fit, x, omega) == pytest.approx(
                        loss_summand(fit, x, omega), rel=1e-12, abs=1e-14
                    )

    def test_convex_in_x(self):
        fits, _ = _random_fits(53, 12)
        for fit in fits:
            xs = np.linspace(0.0, 4.0 * fit.mean(), 50)
            vals = [loss_summand(fit, float(x), 0.5) for x in xs]
            second = [vals[i - 1] - 2 * vals[i] + vals[i + 1] for i in range(1, len(vals) - 1)]
            assert all(s >= -1e-9 for s in second)

    def test_derivative_bracket(self):
        # d/dx loss_summand = omega - P(X > x), so it must lie in [omega-1, omega]
        fits, _ = _random_fits(59, 12)
        h = 1e-6
        for fit in fits:
            for omega in (0.0, 0.5, 1.0):
                for x in (0.2, 0.9, 2.4):
                    d = (loss_summand(fit, x + h, omega) - loss_summand(fit, x - h, omega)) / (2 * h)
                    assert omega - 1.0 - 1e-6 <= d <= omega + 1e-6


class TestSampling:
    def test_me_sample_mean(self):
        rng = np.random.default_rng(101)
        fit = MixedErlang(0.0, 2, 2.0)
        draws = fit.sample(rng, size=1_000_000)
        stderr = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - 1.0) < 4 * stderr

    def test_ln_sample_variance(self):
        rng = np.random.default_rng(103)
        fit = LogNormalDist(-0.5, 1.0)
        draws = fit.sample(rng, size=1_000_000)
        var = draws.var(ddof=1)
        # stderr of the sample variance ~ sqrt((m4 - var^2)/n)
        m4 = np.mean((draws - draws.mean()) ** 4)
        stderr = math.sqrt((m4 - var**2) / draws.size)
        assert abs(var - (math.e - 1.0)) < 4 * stderr

    @pytest.mark.parametrize("maker", [
        lambda: HyperExp(0.3, 0.8, 2.5),
        lambda: MixedErlang(0.4, 4, 3.0),
        lambda: WeibullDist(1.3, 1.7),
        lambda: LogNormalDist(0.1, 0.4),
    ])
    def test_sample_moments_each_family(self, maker):
        rng = np.random.default_rng(107)
        fit = maker()
        draws = fit.sample(rng, size=1_000_000)
        stderr = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - fit.mean()) < 4 * stderr
        var = draws.var(ddof=1)
        m4 = np.mean((draws - draws.mean()) ** 4)
        var_stderr = math.sqrt(max(m4 - var**2, 0.0) / draws.size)
        assert abs(var - fit.variance()) < 4 * var_stderr

    def test_deterministic_given_seed(self):
        fit = WeibullDist(1.0, 2.0)
        a = fit.sample(np.random.default_rng(42), size=1000)
        b = fit.sample(np.random.default_rng(42), size=1000)
        assert np.array_equal(a, b)

    def test_scalar_draw(self):
        value = sample(HyperExp(0.5, 1.0, 1.0), np.random.default_rng(1))
        assert isinstance(value, float) and value >= 0.0

    def test_nonnegative(self):
        fits, _ = _random_fits(61, 8)
        rng = np.random.default_rng(2)
        for fit in fits:
            assert np.all(fit.sample(rng, size=5000) >= 0.0)


class TestValidation:
    def test_he_invalid(self):
        with pytest.raises(DomainError):
            HyperExp(1.2, 1.0, 1.0)
        with pytest.raises(DomainError):
            HyperExp(0.5, -1.0, 1.0)

    def test_me_invalid(self):
        with pytest.raises(DomainError):
            MixedErlang(0.5, 1, 1.0)
        with pytest.raises(DomainError):
            MixedErlang(-0.1, 3, 1.0)

    def test_w_ln_invalid(self):
        with pytest.raises(DomainError):
            WeibullDist(0.0, 1.0)
        with pytest.raises(DomainError):
            LogNormalDist(0.0, 0.0)
        with pytest.raises(DomainError):
            LogNormalDist(math.inf, 1.0)
