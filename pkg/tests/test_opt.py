"""Schedule optimization: analytic minimizer, optimality, dome shape."""

import math

import numpy as np
import pytest

from apptsched.engine import EngineConfig, ServiceProfile, evaluate_loss
from apptsched.errors import DomainError
from apptsched.opt import optimality_gap, optimize, relative_error
from apptsched.schedule import Schedule, equidistant


def test_two_client_exponential_analytic_minimizer():
    # L(x) = e^-x + 0.5 (x - 1); stationarity at x = ln 2
    profile = ServiceProfile.homogeneous(2, 1.0, 1.0)
    result = optimize(profile, EngineConfig(0.5, "PH"))
    assert result.converged
    assert result.x_star.x[0] == pytest.approx(math.log(2.0), abs=1e-4)
    want_loss = 0.5 + 0.5 * (math.log(2.0) - 1.0)
    assert result.loss_at_optimum == pytest.approx(want_loss, abs=1e-8)


def test_two_client_loss_formula():
    profile = ServiceProfile.homogeneous(2, 1.0, 1.0)
    cfg = EngineConfig(0.5, "PH")
    for x in (0.0, 0.5, 1.0, 2.0):
        total = evaluate_loss(profile, Schedule((x,)), cfg).total
        assert total == pytest.approx(math.exp(-x) + 0.5 * (x - 1.0), rel=1e-12)


def test_loss_at_optimum_consistent_with_engine():
    profile = ServiceProfile.homogeneous(5, 1.0, 0.8)
    cfg = EngineConfig(0.5, "PH")
    result = optimize(profile, cfg)
    assert result.loss_at_optimum == pytest.approx(
        evaluate_loss(profile, result.x_star, cfg).total, abs=1e-12
    )


def test_single_client_trivial():
    profile = ServiceProfile.homogeneous(1, 1.0, 0.5)
    result = optimize(profile, EngineConfig(0.5, "PH"))
    assert result.x_star.x == ()
    assert result.loss_at_optimum == 0.0
    assert result.converged


@pytest.mark.parametrize("family", ["PH", "W", "LN"])
def test_optimum_beats_heuristics(family):
    profile = ServiceProfile.homogeneous(10, 1.0, 0.7)
    cfg = EngineConfig(0.5, family)
    result = optimize(profile, cfg)
    assert result.converged
    assert result.x_star.x == tuple(max(v, 0.0) for v in result.x_star.x)
    init_loss = evaluate_loss(profile, equidistant(10, 1.5), cfg).total
    assert result.loss_at_optimum <= init_loss + 1e-8
    for y in (1.0, 1.2, 1.5, 1.8):
        heuristic = evaluate_loss(profile, equidistant(10, y), cfg).total
        assert result.loss_at_optimum <= heuristic + 1e-8


def test_perturbation_confirms_local_optimality():
    profile = ServiceProfile.homogeneous(8, 1.0, 1.0)
    cfg = EngineConfig(0.5, "PH")
    result = optimize(profile, cfg)
    base = result.loss_at_optimum
    x = np.array(result.x_star.x)
    for i in range(len(x)):
        for delta in (1e-3, -1e-3):
            trial = x.copy()
            trial[i] += delta
            if trial[i] < 0:
                continue
            loss = evaluate_loss(profile, Schedule(tuple(trial)), cfg).total
            assert loss >= base - 1e-8


def test_dome_shape_for_homogeneous_forty():
    profile = ServiceProfile.homogeneous(40, 1.0, 0.7)
    result = optimize(profile, EngineConfig(0.5, "PH"))
    assert result.converged
    interior = result.x_star.x[4 : 40 - 5]
    assert max(interior) / min(interior) <= 1.1


def test_custom_init_and_bad_init():
    profile = ServiceProfile.homogeneous(4, 1.0, 0.9)
    cfg = EngineConfig(0.5, "PH")
    result = optimize(profile, cfg, init=equidistant(4, 1.0))
    assert result.converged
    with pytest.raises(DomainError):
        optimize(profile, cfg, init=Schedule((1.0,)))
    with pytest.raises(DomainError):
        optimize(profile, cfg, tol=0.0)


class TestGapMetrics:
    def test_relative_error(self):
        assert relative_error(17.15, 17.13) == pytest.approx(0.1168, abs=2e-3)
        assert relative_error(3.0, 3.0) == 0.0
        assert relative_error(14.46, 14.53) == pytest.approx(0.4817, abs=2e-3)
        with pytest.raises(DomainError):
            relative_error(1.0, 0.0)

    def test_optimality_gap_min_denominator(self):
        assert optimality_gap(22.55, 22.55) == 0.0
        assert optimality_gap(13.47, 13.65) == pytest.approx(1.336, abs=2e-3)
        assert optimality_gap(13.65, 13.47) == pytest.approx(1.336, abs=2e-3)

    def test_optimality_gap_reference_denominator(self):
        got = optimality_gap(13.61, 13.59, denominator="reference")
        assert got == pytest.approx(abs(13.61 - 13.59) / 13.59 * 100.0, rel=1e-12)

    def test_gap_validation(self):
        with pytest.raises(DomainError):
            optimality_gap(1.0, 0.0)
        with pytest.raises(DomainError):
            optimality_gap(1.0, 2.0, denominator="nope")
        with pytest.raises(DomainError):
            optimality_gap(math.inf, 2.0)
