"""Two-moment fits: map a (mean, variance) pair onto a distribution family.

The phase-type fit follows the balanced-means recipe: hyperexponential
when the squared coefficient of variation (scv) is >= 1, mixed Erlang
below that, with the phase count k picked so that scv falls in
(1/k, 1/(k-1)]. Weibull shape comes out of a bisection on the scv as a
function of alpha; the lognormal fit is a pair of logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._kernels import ME_MAX_PHASES
from .dist import HyperExp, LogNormalDist, MixedErlang, SojournFit, WeibullDist
from .errors import ConvergenceError, DegenerateInputError, DomainError

_WEIBULL_BRACKET = (0.05, 50.0)
_WEIBULL_TOL = 1e-12
_WEIBULL_MAX_ITER = 400


@dataclass(frozen=True, slots=True)
class MomentPair:
    """Target mean and variance for a fit."""

    mean: float
    var: float

    def __post_init__(self) -> None:
        if self.mean <= 0.0:
            raise DomainError(f"MomentPair mean must be > 0, got {self.mean}")
        if self.var < 0.0:
            raise DomainError(f"MomentPair var must be >= 0, got {self.var}")

    @property
    def scv(self) -> float:
        return self.var / (self.mean * self.mean)


def _require_positive_var(m: MomentPair, what: str) -> None:
    if m.var == 0.0:
        raise DegenerateInputError(
            f"{what} cannot represent a point mass (variance 0 at mean {m.mean})"
        )


def fit_phase_type(m: MomentPair) -> SojournFit:
    """Balanced-means hyperexponential (scv >= 1) or mixed-Erlang (scv < 1) fit."""
    _require_positive_var(m, "phase-type fit")
    scv = m.scv
    if scv >= 1.0:
        c = math.sqrt(max(0.0, (scv - 1.0) / (scv + 1.0)))
        alpha = 0.5 * (1.0 + c)
        return HyperExp(alpha=alpha, mu1=2.0 * alpha / m.mean, mu2=2.0 * (1.0 - alpha) / m.mean)

    k = math.floor(1.0 / scv) + 1
    # nudge k so that 1/k < scv <= 1/(k-1) holds despite rounding in 1/scv
    while scv * k <= 1.0:
        k += 1
    while k > 2 and scv * (k - 1) > 1.0:
        k -= 1
    if k > ME_MAX_PHASES:
        raise DegenerateInputError(
            f"mixed-Erlang fit needs {k} phases (scv={scv:.3e}); cap is {ME_MAX_PHASES}"
        )
    disc = max(0.0, k * (1.0 + scv) - k * k * scv)
    p = (k * scv - math.sqrt(disc)) / (1.0 + scv)
    p = min(1.0, max(0.0, p))
    return MixedErlang(p=p, k=k, mu=(k - p) / m.mean)


def weibull_scv(alpha: float) -> float:
    """scv of a Weibull with shape alpha; decreasing from inf to 0."""
    return math.expm1(
        math.lgamma(1.0 + 2.0 / alpha) - 2.0 * math.lgamma(1.0 + 1.0 / alpha)
    )


def fit_weibull(m: MomentPair) -> WeibullDist:
    """Weibull fit: bisect the shape on the scv equation, then set the scale."""
    _require_positive_var(m, "Weibull fit")
    target = m.scv
    lo, hi = _WEIBULL_BRACKET
    # expand geometrically until the decreasing scv function brackets the target
    while weibull_scv(lo) < target:
        lo *= 0.5
        if lo < 1e-6:
            raise ConvergenceError(f"Weibull bracket expansion failed low for scv={target}")
    while weibull_scv(hi) > target:
        hi *= 2.0
        if hi > 1e6:
            raise ConvergenceError(f"Weibull bracket expansion failed high for scv={target}")
    alpha = 0.5 * (lo + hi)
    for _ in range(_WEIBULL_MAX_ITER):
        alpha = 0.5 * (lo + hi)
        f = weibull_scv(alpha) - target
        if abs(f) < _WEIBULL_TOL or hi - lo < _WEIBULL_TOL:
            break
        if f > 0.0:
            lo = alpha
        else:
            hi = alpha
    else:
        raise ConvergenceError(f"Weibull shape bisection did not converge for scv={target}")
    lam = math.exp(math.lgamma(1.0 + 1.0 / alpha)) / m.mean
    return WeibullDist(lam=lam, alpha=alpha)


def fit_lognormal(m: MomentPair) -> LogNormalDist:
    """Lognormal fit: tau2 = log(1 + scv), mu = log(mean^2 / sqrt(var + mean^2))."""
    _require_positive_var(m, "lognormal fit")
    tau2 = math.log1p(m.scv)
    mu = 2.0 * math.log(m.mean) - 0.5 * math.log(m.var + m.mean * m.mean)
    return LogNormalDist(mu=mu, tau2=tau2)
