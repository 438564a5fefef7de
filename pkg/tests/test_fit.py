"""Two-moment fits: round trips, branch selection, scale equivariance."""

import math

import numpy as np
import pytest

from apptsched.dist import HyperExp, MixedErlang
from apptsched.errors import DegenerateInputError, DomainError
from apptsched.fit import (
    MomentPair,
    fit_lognormal,
    fit_phase_type,
    fit_weibull,
    weibull_scv,
)

MEANS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
SCVS = (0.05, 0.11, 0.25, 0.5, 0.8, 1.0, 1.4, 2.5, 5.0)


class TestPhaseType:
    def test_unit_scv_degenerates_to_exponential(self):
        fit = fit_phase_type(MomentPair(1.0, 1.0))
        assert isinstance(fit, HyperExp)
        assert fit.alpha == pytest.approx(0.5)
        assert fit.mu1 == pytest.approx(1.0)
        assert fit.mu2 == pytest.approx(1.0)

    def test_half_scv_is_erlang_two(self):
        # scv exactly 1/2 sits on a k-interval boundary: both the (p=0, k=2)
        # and the (p=1, k=3) parameterizations describe Erlang(2, 2); the
        # black-box contract is the round trip and the density
        fit = fit_phase_type(MomentPair(1.0, 0.5))
        assert isinstance(fit, MixedErlang)
        assert fit.mean() == pytest.approx(1.0, rel=1e-12)
        assert fit.variance() == pytest.approx(0.5, rel=1e-12)
        erlang2 = MixedErlang(0.0, 2, 2.0)
        for y in (0.1, 0.5, 1.3, 2.9):
            assert fit.pdf(y) == pytest.approx(erlang2.pdf(y), rel=1e-10)

    def test_he_example_round_trip(self):
        # scv = 8/4 = 2, so alpha = (1 + sqrt((2-1)/(2+1))) / 2
        fit = fit_phase_type(MomentPair(2.0, 8.0))
        assert isinstance(fit, HyperExp)
        assert fit.alpha == pytest.approx(0.5 * (1.0 + math.sqrt(1.0 / 3.0)), rel=1e-13)
        assert fit.mean() == pytest.approx(2.0, rel=1e-10)
        assert fit.variance() == pytest.approx(8.0, rel=1e-10)

    def test_branch_rule(self):
        for mean in MEANS:
            for scv in SCVS:
                fit = fit_phase_type(MomentPair(mean, scv * mean * mean))
                if scv >= 1.0:
                    assert isinstance(fit, HyperExp)
                else:
                    assert isinstance(fit, MixedErlang)

    def test_me_k_interval_and_p_range(self):
        for mean in MEANS:
            for scv in (s for s in SCVS if s < 1.0):
                fit = fit_phase_type(MomentPair(mean, scv * mean * mean))
                assert 1.0 / fit.k < scv <= 1.0 / (fit.k - 1)
                assert 0.0 <= fit.p <= 1.0

    def test_round_trip_grid(self):
        for mean in MEANS:
            for scv in SCVS:
                m = MomentPair(mean, scv * mean * mean)
                fit = fit_phase_type(m)
                assert fit.mean() == pytest.approx(m.mean, rel=1e-10)
                assert fit.variance() == pytest.approx(m.var, rel=1e-10)

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInputError):
            fit_phase_type(MomentPair(1.0, 0.0))

    def test_phase_cap(self):
        with pytest.raises(DegenerateInputError):
            fit_phase_type(MomentPair(1.0, 5e-5))


class TestWeibull:
    def test_unit_scv_is_exponential(self):
        fit = fit_weibull(MomentPair(1.0, 1.0))
        assert fit.alpha == pytest.approx(1.0, abs=1e-9)
        assert fit.lam == pytest.approx(1.0, rel=1e-9)

    def test_round_trip_example(self):
        fit = fit_weibull(MomentPair(1.0, 0.4))
        assert fit.variance() == pytest.approx(0.4, abs=1e-8)
        assert fit.mean() == pytest.approx(1.0, rel=1e-8)

    def test_scale_invariance_of_shape(self):
        a = fit_weibull(MomentPair(1.0, 0.4))
        b = fit_weibull(MomentPair(2.0, 0.4 * 4.0))
        assert b.alpha == pytest.approx(a.alpha, rel=1e-10)
        assert b.lam == pytest.approx(a.lam / 2.0, rel=1e-10)

    def test_round_trip_grid(self):
        for mean in MEANS:
            for scv in SCVS:
                m = MomentPair(mean, scv * mean * mean)
                fit = fit_weibull(m)
                assert fit.mean() == pytest.approx(m.mean, rel=1e-8)
                assert fit.variance() == pytest.approx(m.var, rel=1e-8)

    def test_bisection_residual(self):
        for scv in SCVS:
            fit = fit_weibull(MomentPair(1.0, scv))
            assert abs(weibull_scv(fit.alpha) - scv) <= 1e-10

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInputError):
            fit_weibull(MomentPair(2.0, 0.0))


class TestLogNormal:
    def test_example(self):
        fit = fit_lognormal(MomentPair(1.0, math.e - 1.0))
        assert fit.tau2 == pytest.approx(1.0, rel=1e-13)
        assert fit.mu == pytest.approx(-0.5, rel=1e-13)

    def test_derived_example(self):
        fit = fit_lognormal(MomentPair(1.0, 0.7))
        assert fit.tau2 == pytest.approx(math.log(1.7), rel=1e-13)
        assert fit.mu == pytest.approx(-math.log(math.sqrt(1.7)), rel=1e-12)
        assert fit.mean() == pytest.approx(1.0, rel=1e-12)
        assert fit.variance() == pytest.approx(0.7, rel=1e-12)

    def test_scale_shifts_mu_only(self):
        a = fit_lognormal(MomentPair(1.0, 0.7))
        b = fit_lognormal(MomentPair(3.0, 0.7 * 9.0))
        assert b.tau2 == pytest.approx(a.tau2, rel=1e-12)
        assert b.mu == pytest.approx(a.mu + math.log(3.0), rel=1e-12)

    def test_round_trip_grid(self):
        for mean in MEANS:
            for scv in SCVS:
                m = MomentPair(mean, scv * mean * mean)
                fit = fit_lognormal(m)
                assert fit.mean() == pytest.approx(m.mean, rel=1e-12)
                assert fit.variance() == pytest.approx(m.var, rel=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInputError):
            fit_lognormal(MomentPair(1.0, 0.0))


class TestScaleEquivariance:
    def test_all_families(self):
        rng = np.random.default_rng(71)
        for _ in range(40):
            mean = float(rng.uniform(0.1, 10.0))
            scv = float(rng.uniform(0.05, 5.0))
            c = float(rng.uniform(0.2, 8.0))
            base = MomentPair(mean, scv * mean * mean)
            scaled = MomentPair(c * mean, c * c * scv * mean * mean)

            pf, ps = fit_phase_type(base), fit_phase_type(scaled)
            if isinstance(pf, HyperExp):
                assert ps.alpha == pytest.approx(pf.alpha, rel=1e-10)
                assert ps.mu1 == pytest.approx(pf.mu1 / c, rel=1e-10)
                assert ps.mu2 == pytest.approx(pf.mu2 / c, rel=1e-10)
            else:
                assert ps.k == pf.k
                assert ps.p == pytest.approx(pf.p, rel=1e-9, abs=1e-10)
                assert ps.mu == pytest.approx(pf.mu / c, rel=1e-10)

            wf, ws = fit_weibull(base), fit_weibull(scaled)
            assert ws.alpha == pytest.approx(wf.alpha, rel=1e-10)
            assert ws.lam == pytest.approx(wf.lam / c, rel=1e-10)

            lf, ls = fit_lognormal(base), fit_lognormal(scaled)
            assert ls.tau2 == pytest.approx(lf.tau2, rel=1e-10)
            assert ls.mu == pytest.approx(lf.mu + math.log(c), rel=1e-9, abs=1e-12)


class TestMomentPair:
    def test_validation(self):
        with pytest.raises(DomainError):
            MomentPair(0.0, 1.0)
        with pytest.raises(DomainError):
            MomentPair(1.0, -0.5)

    def test_scv(self):
        assert MomentPair(2.0, 2.0).scv == pytest.approx(0.5)
