"""Sojourn-time distribution families and their excess moments.

Four two-parameter-ish families are supported: hyperexponential (HE),
mixed Erlang (ME), Weibull (W) and Lognormal (LN). Each knows its mean,
variance, excess mean E(X-x)+ and excess second moment E((X-x)+)^2 in
closed form; those four quantities are all the recursion engine needs.

The mixed-Erlang excess moments exist in two algebraically equivalent
shapes: a direct-integration form (the M and S helpers) and a
phase-counting form. Both are exposed so tests can pit one against the
other. Powers like mu^(k-1) x^k e^(-mu x) are assembled in the log domain
because the phase count k grows as the squared coefficient of variation
shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from .errors import DomainError
from .specfun import log_gamma, normal_tail, regularized_gamma_q, upper_incomplete_gamma

_REL_CLAMP = 1e-12


def _clamp_nonnegative(value: float, scale: float) -> float:
    # cancellation can leave a tiny negative residue; zero is the true floor;
    # anything substantially negative passes through so bugs stay visible
    if value < 0.0 and -value < _REL_CLAMP * max(scale, 1e-300):
        return 0.0
    return value


def _check_x(x: float) -> None:
    if x < 0.0:
        raise DomainError(f"excess threshold must be >= 0, got {x}")


@dataclass(frozen=True, slots=True)
class HyperExp:
    """Mixture of two exponentials: rate mu1 w.p. alpha, rate mu2 otherwise."""

    alpha: float
    mu1: float
    mu2: float

    family: ClassVar[str] = "HE"

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"HyperExp alpha must lie in [0, 1], got {self.alpha}")
        if self.mu1 <= 0.0 or self.mu2 <= 0.0:
            raise DomainError("HyperExp rates must be positive")

    def mean(self) -> float:
        return self.alpha / self.mu1 + (1.0 - self.alpha) / self.mu2

    def variance(self) -> float:
        a, m1, m2 = self.alpha, self.mu1, self.mu2
        return a / m1**2 + (1.0 - a) / m2**2 + a * (1.0 - a) * (1.0 / m1 - 1.0 / m2) ** 2

    def pdf(self, y: float) -> float:
        if y < 0.0:
            return 0.0
        a, m1, m2 = self.alpha, self.mu1, self.mu2
        return a * m1 * math.exp(-m1 * y) + (1.0 - a) * m2 * math.exp(-m2 * y)

    def excess_mean(self, x: float) -> float:
        _check_x(x)
        a, m1, m2 = self.alpha, self.mu1, self.mu2
        return (a / m1) * math.exp(-m1 * x) + ((1.0 - a) / m2) * math.exp(-m2 * x)

    def excess_second_moment(self, x: float) -> float:
        _check_x(x)
        a, m1, m2 = self.alpha, self.mu1, self.mu2
        return 2.0 * ((a / m1**2) * math.exp(-m1 * x) + ((1.0 - a) / m2**2) * math.exp(-m2 * x))

    def excess_pair(self, x: float) -> tuple[float, float]:
        """(excess mean, excess second moment) sharing the exponentials."""
        _check_x(x)
        a, m1, m2 = self.alpha, self.mu1, self.mu2
        e1 = (a / m1) * math.exp(-m1 * x)
        e2 = ((1.0 - a) / m2) * math.exp(-m2 * x)
        return e1 + e2, 2.0 * (e1 / m1 + e2 / m2)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        m = 1 if size is None else int(size)
        pick_first = rng.random(m) < self.alpha
        rate = np.where(pick_first, self.mu1, self.mu2)
        draws = -np.log1p(-rng.random(m)) / rate
        return float(draws[0]) if size is None else draws


@dataclass(frozen=True, slots=True)
class MixedErlang:
    """Erlang(k-1, mu) w.p. p, Erlang(k, mu) otherwise; k >= 2."""

    p: float
    k: int
    mu: float

    family: ClassVar[str] = "ME"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"MixedErlang p must lie in [0, 1], got {self.p}")
        if not isinstance(self.k, int) or self.k < 2:
            raise DomainError(f"MixedErlang phase count must be an integer >= 2, got {self.k}")
        if self.mu <= 0.0:
            raise DomainError("MixedErlang rate must be positive")

    def mean(self) -> float:
        return (self.k - self.p) / self.mu

    def variance(self) -> float:
        return (self.k - self.p**2) / self.mu**2

    def pdf(self, y: float) -> float:
        if y < 0.0:
            return 0.0
        p, k, mu = self.p, self.k, self.mu
        if y == 0.0:
            return p * mu if k == 2 else 0.0
        ly = math.log(y)
        lo = (k - 1) * math.log(mu) + (k - 2) * ly - mu * y - log_gamma(k - 1)
        hi = k * math.log(mu) + (k - 1) * ly - mu * y - log_gamma(k)
        return p * math.exp(lo) + (1.0 - p) * math.exp(hi)

    @staticmethod
    def _m_term(k: int, x: float, mu: float) -> float:
        """M(k, x, mu) / (k-1)! = Q(k, mu x) (k/mu - x) + mu^(k-1) x^k e^(-mu x) / (k-1)!."""
        if x == 0.0:
            return k / mu
        q = regularized_gamma_q(k, mu * x)
        power = math.exp((k - 1) * math.log(mu) + k * math.log(x) - mu * x - log_gamma(k))
        return q * (k / mu - x) + power

    @staticmethod
    def _s_term(k: int, x: float, mu: float) -> float:
        """S(k, x, mu) / (k-1)! with the power factor evaluated in log form."""
        if x == 0.0:
            return k * (k + 1) / mu**2
        t = mu * x
        q = regularized_gamma_q(k, t)
        power = math.exp(-t + (k - 2) * math.log(mu) + k * math.log(x) - log_gamma(k))
        return q * (k + (k - t) ** 2) / mu**2 + power * (k + 1 - t)

    def _excess_terms_fast(self, x: float) -> tuple[float, float]:
        """Both excess moments from one Poisson-tail sweep (needs mu x < 700).

        With t = mu x and pois(i) = e^-t t^i / i!, the M and S expressions
        collapse to Q(k-1, t), Q(k, t), pois(k-2) and pois(k-1), all of
        which fall out of a single pmf recurrence without logs.
        """
        p, k, mu = self.p, self.k, self.mu
        t = mu * x
        term = math.exp(-t)
        q_low = 0.0
        for i in range(k - 1):
            q_low += term
            term *= t / (i + 1)
        # loop leaves term = pois(k-1); the previous value is pois(k-2)
        pois_k1 = term
        pois_k2 = pois_k1 * (k - 1) / t if t > 0.0 else 0.0
        q_high = q_low + pois_k1

        em = p * (q_low * ((k - 1) / mu - x) + pois_k2 * x) + (1.0 - p) * (
            q_high * (k / mu - x) + pois_k1 * x
        )
        esm = p * (
            q_low * ((k - 1) + (k - 1 - t) ** 2) / mu**2 + pois_k2 * (x / mu) * (k - t)
        ) + (1.0 - p) * (
            q_high * (k + (k - t) ** 2) / mu**2 + pois_k1 * (x / mu) * (k + 1 - t)
        )
        return em, esm

    def excess_pair(self, x: float) -> tuple[float, float]:
        """(excess mean, excess second moment), sharing the gamma tails."""
        _check_x(x)
        if x == 0.0:
            return self.mean(), self.k * (self.k + 1 - 2 * self.p) / self.mu**2
        if self.mu * x < 700.0 and self.k <= 1000:
            em, esm = self._excess_terms_fast(x)
        else:
            em = self.p * self._m_term(self.k - 1, x, self.mu) + (1.0 - self.p) * self._m_term(
                self.k, x, self.mu
            )
            esm = self.p * self._s_term(self.k - 1, x, self.mu) + (
                1.0 - self.p
            ) * self._s_term(self.k, x, self.mu)
        return (
            _clamp_nonnegative(em, self.mean()),
            _clamp_nonnegative(esm, self.mean() ** 2 + self.variance()),
        )

    def excess_mean(self, x: float) -> float:
        _check_x(x)
        return self.excess_pair(x)[0]

    def excess_mean_phase_form(self, x: float) -> float:
        """Excess mean by conditioning on completed phases in (0, x)."""
        _check_x(x)
        p, k, mu = self.p, self.k, self.mu
        if x == 0.0:
            return (k - p) / mu
        t = mu * x
        q = regularized_gamma_q(k - 1, t)
        power = math.exp((k - 1) * math.log(t) - t - log_gamma(k))
        value = q * (k - p - t) / mu + (k - p) / mu * power
        return _clamp_nonnegative(value, self.mean())

    def excess_second_moment(self, x: float) -> float:
        _check_x(x)
        return self.excess_pair(x)[1]

    def excess_second_moment_phase_form(self, x: float) -> float:
        """Excess second moment by phase counting: (c1 Q(k, t) + c2 pois(k-1, t)) / mu^2.

        Collapsing sum_{i<k} pois(i; t) (k-i)(k+1-2p-i) gives
        c1 = (k-t)^2 + k - 2p(k-t) and c2 = t(k+1-2p-t) with t = mu x.
        """
        _check_x(x)
        p, k, mu = self.p, self.k, self.mu
        if x == 0.0:
            return k * (k + 1 - 2 * p) / mu**2
        t = mu * x
        c1 = (k - t) ** 2 + k - 2 * p * (k - t)
        c2 = t * (k + 1 - 2 * p - t)
        q = regularized_gamma_q(k, t)
        power = math.exp((k - 1) * math.log(t) - t - log_gamma(k))
        value = (c1 * q + c2 * power) / mu**2
        return _clamp_nonnegative(value, self.mean() ** 2 + self.variance())

    def sample(self, rng: np.random.Generator, size: int | None = None):
        m = 1 if size is None else int(size)
        short = rng.random(m) < self.p
        exps = -np.log1p(-rng.random((m, self.k)))
        sums = exps.cumsum(axis=1)
        draws = np.where(short, sums[:, self.k - 2], sums[:, self.k - 1]) / self.mu
        return float(draws[0]) if size is None else draws


@dataclass(frozen=True, slots=True)
class WeibullDist:
    """Weibull with scale rate lam and shape alpha: P(X > y) = exp(-(lam y)^alpha)."""

    lam: float
    alpha: float

    family: ClassVar[str] = "W"

    def __post_init__(self) -> None:
        if self.lam <= 0.0 or self.alpha <= 0.0:
            raise DomainError("Weibull parameters must be positive")

    def mean(self) -> float:
        return math.exp(log_gamma(1.0 + 1.0 / self.alpha)) / self.lam

    def variance(self) -> float:
        g1 = log_gamma(1.0 + 1.0 / self.alpha)
        g2 = log_gamma(1.0 + 2.0 / self.alpha)
        return (math.exp(g2) - math.exp(2.0 * g1)) / self.lam**2

    def pdf(self, y: float) -> float:
        if y < 0.0:
            return 0.0
        lam, al = self.lam, self.alpha
        if y == 0.0:
            if al < 1.0:
                return math.inf
            return lam if al == 1.0 else 0.0
        u = (lam * y) ** al
        return al * lam**al * y ** (al - 1.0) * math.exp(-u)

    def excess_mean(self, x: float) -> float:
        _check_x(x)
        lam, al = self.lam, self.alpha
        u = (lam * x) ** al
        value = upper_incomplete_gamma(1.0 + 1.0 / al, u) / lam - x * math.exp(-u)
        return _clamp_nonnegative(value, self.mean())

    def excess_second_moment(self, x: float) -> float:
        _check_x(x)
        lam, al = self.lam, self.alpha
        u = (lam * x) ** al
        value = (
            upper_incomplete_gamma(1.0 + 2.0 / al, u) / lam**2
            - (2.0 * x / lam) * upper_incomplete_gamma(1.0 + 1.0 / al, u)
            + x * x * math.exp(-u)
        )
        return _clamp_nonnegative(value, self.mean() ** 2 + self.variance())

    def excess_pair(self, x: float) -> tuple[float, float]:
        """(excess mean, excess second moment), sharing the gamma calls."""
        _check_x(x)
        lam, al = self.lam, self.alpha
        u = (lam * x) ** al
        g1 = upper_incomplete_gamma(1.0 + 1.0 / al, u)
        tail = math.exp(-u)
        em = g1 / lam - x * tail
        esm = (
            upper_incomplete_gamma(1.0 + 2.0 / al, u) / lam**2
            - (2.0 * x / lam) * g1
            + x * x * tail
        )
        return (
            _clamp_nonnegative(em, self.mean()),
            _clamp_nonnegative(esm, self.mean() ** 2 + self.variance()),
        )

    def sample(self, rng: np.random.Generator, size: int | None = None):
        m = 1 if size is None else int(size)
        e = -np.log1p(-rng.random(m))
        draws = e ** (1.0 / self.alpha) / self.lam
        return float(draws[0]) if size is None else draws


@dataclass(frozen=True, slots=True)
class LogNormalDist:
    """Lognormal: log X ~ N(mu, tau2)."""

    mu: float
    tau2: float

    family: ClassVar[str] = "LN"

    def __post_init__(self) -> None:
        if self.tau2 <= 0.0:
            raise DomainError("LogNormal tau2 must be positive")
        if not math.isfinite(self.mu):
            raise DomainError("LogNormal mu must be finite")

    def mean(self) -> float:
        return math.exp(self.mu + self.tau2 / 2.0)

    def variance(self) -> float:
        return math.expm1(self.tau2) * math.exp(2.0 * self.mu + self.tau2)

    def pdf(self, y: float) -> float:
        if y <= 0.0:
            return 0.0
        tau = math.sqrt(self.tau2)
        z = (math.log(y) - self.mu) / tau
        return math.exp(-0.5 * z * z) / (tau * y * math.sqrt(2.0 * math.pi))

    def excess_mean(self, x: float) -> float:
        _check_x(x)
        tau = math.sqrt(self.tau2)
        lx = math.log(x) if x > 0.0 else -math.inf
        value = self.mean() * normal_tail((lx - self.mu - self.tau2) / tau) - x * normal_tail(
            (lx - self.mu) / tau
        )
        return _clamp_nonnegative(value, self.mean())

    def excess_second_moment(self, x: float) -> float:
        _check_x(x)
        tau = math.sqrt(self.tau2)
        lx = math.log(x) if x > 0.0 else -math.inf
        second_raw = math.exp(2.0 * (self.mu + self.tau2))
        value = (
            second_raw * normal_tail((lx - self.mu - 2.0 * self.tau2) / tau)
            - 2.0 * x * self.mean() * normal_tail((lx - self.mu - self.tau2) / tau)
            + x * x * normal_tail((lx - self.mu) / tau)
        )
        return _clamp_nonnegative(value, self.mean() ** 2 + self.variance())

    def excess_pair(self, x: float) -> tuple[float, float]:
        """(excess mean, excess second moment), sharing the normal tails."""
        _check_x(x)
        mu, tau2 = self.mu, self.tau2
        tau = math.sqrt(tau2)
        lx = math.log(x) if x > 0.0 else -math.inf
        mean = math.exp(mu + tau2 / 2.0)
        tail1 = normal_tail((lx - mu - tau2) / tau)
        tail0 = normal_tail((lx - mu) / tau)
        em = mean * tail1 - x * tail0
        esm = (
            math.exp(2.0 * (mu + tau2)) * normal_tail((lx - mu - 2.0 * tau2) / tau)
            - 2.0 * x * mean * tail1
            + x * x * tail0
        )
        return (
            _clamp_nonnegative(em, mean),
            _clamp_nonnegative(esm, mean * mean + self.variance()),
        )

    def sample(self, rng: np.random.Generator, size: int | None = None):
        m = 1 if size is None else int(size)
        u1 = rng.random(m)
        u2 = rng.random(m)
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        draws = np.exp(self.mu + math.sqrt(self.tau2) * z)
        return float(draws[0]) if size is None else draws


SojournFit = Union[HyperExp, MixedErlang, WeibullDist, LogNormalDist]


def loss_summand(fit: SojournFit, x: float, omega: float) -> float:
    """Per-client loss term E(X - x)+ + omega (x - E X).

    This composition is the production definition; the family-specific
    closed forms below exist to cross-check it.
    """
    if not 0.0 <= omega <= 1.0:
        raise DomainError(f"omega must lie in [0, 1], got {omega}")
    return fit.excess_mean(x) + omega * (x - fit.mean())


def loss_summand_closed_form(fit: SojournFit, x: float, omega: float) -> float:
    """Family-specific expansions of the loss term; test oracle only."""
    _check_x(x)
    if isinstance(fit, HyperExp):
        a, m1, m2 = fit.alpha, fit.mu1, fit.mu2
        return (
            (a / m1) * (math.exp(-m1 * x) - omega)
            + ((1.0 - a) / m2) * (math.exp(-m2 * x) - omega)
            + omega * x
        )
    if isinstance(fit, MixedErlang):
        return fit.excess_mean_phase_form(x) + omega * (x - (fit.k - fit.p) / fit.mu)
    if isinstance(fit, WeibullDist):
        lam, al = fit.lam, fit.alpha
        u = (lam * x) ** al
        mean = math.exp(log_gamma(1.0 + 1.0 / al)) / lam
        return (
            upper_incomplete_gamma(1.0 + 1.0 / al, u) / lam
            - x * math.exp(-u)
            + omega * x
            - omega * mean
        )
    if isinstance(fit, LogNormalDist):
        tau = math.sqrt(fit.tau2)
        lx = math.log(x) if x > 0.0 else -math.inf
        return fit.mean() * (normal_tail((lx - fit.mu - fit.tau2) / tau) - omega) - x * (
            normal_tail((lx - fit.mu) / tau) - omega
        )
    raise TypeError(f"unsupported fit type {type(fit)!r}")


def sample(fit: SojournFit, rng: np.random.Generator, size: int | None = None):
    """Draw from a fitted distribution with a caller-supplied generator."""
    return fit.sample(rng, size)


def excess_mean_quadrature(fit: SojournFit, x: float) -> float:
    """Adaptive quadrature of int_0^inf y f(y + x) dy; slow test oracle."""
    from scipy import integrate

    _check_x(x)
    value, _ = integrate.quad(
        lambda y: y * fit.pdf(y + x), 0.0, math.inf, limit=400, epsabs=1e-14, epsrel=1e-11
    )
    return value


def excess_second_moment_quadrature(fit: SojournFit, x: float) -> float:
    """Adaptive quadrature of int_0^inf y^2 f(y + x) dy; slow test oracle."""
    from scipy import integrate

    _check_x(x)
    value, _ = integrate.quad(
        lambda y: y * y * fit.pdf(y + x), 0.0, math.inf, limit=400, epsabs=1e-14, epsrel=1e-11
    )
    return value
