"""Compiled evaluation kernels for the moment recursion.

One kernel per fit family, each taking the service moment arrays, the gap
vector and the loss weight, and returning the sojourn mean/variance
trajectories, the per-client loss terms and the variance-clamp count.
The formulas are the same closed forms the distribution classes expose;
tests hold the two code paths against each other.

Compiled with numba (cache=True, strict IEEE math) so that evaluation
cost reflects the intrinsic operation counts: the phase-type step runs a
short Poisson-tail recurrence, the lognormal step three complementary
error functions, the Weibull step a shape bisection plus incomplete
gamma evaluations. First use per machine pays a one-off compilation that
is cached on disk.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_ITMAX = 10_000

# hard cap on the mixed-Erlang phase count; beyond this the moment pair is
# treated as degenerate (eval_ph flags it via a negative clamp count)
ME_MAX_PHASES = 10_000


@njit(cache=True)
def _gamma_q(a: float, t: float) -> float:
    """Regularized upper incomplete gamma Q(a, t); series / continued fraction."""
    if t <= 0.0:
        return 1.0
    if t < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(_ITMAX):
            ap += 1.0
            term *= t / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return 1.0 - total * math.exp(-t + a * math.log(t) - math.lgamma(a))
    b = t + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b if abs(b) > _FPMIN else 1.0 / _FPMIN
    h = d
    for i in range(1, _ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-t + a * math.log(t) - math.lgamma(a)) * h


@njit(cache=True)
def _gamma_upper(a: float, t: float) -> float:
    """Unregularized Gamma(a, t) for moderate shapes."""
    return _gamma_q(a, t) * math.exp(math.lgamma(a))


@njit(cache=True)
def _weibull_shape(scv: float) -> float:
    """Shape alpha solving Gamma(1+2/a)/Gamma(1+1/a)^2 - 1 = scv by bisection."""
    lo = 0.05
    hi = 50.0
    while math.expm1(math.lgamma(1.0 + 2.0 / lo) - 2.0 * math.lgamma(1.0 + 1.0 / lo)) < scv:
        lo *= 0.5
    while math.expm1(math.lgamma(1.0 + 2.0 / hi) - 2.0 * math.lgamma(1.0 + 1.0 / hi)) > scv:
        hi *= 2.0
    alpha = 0.5 * (lo + hi)
    for _ in range(400):
        alpha = 0.5 * (lo + hi)
        f = math.expm1(math.lgamma(1.0 + 2.0 / alpha) - 2.0 * math.lgamma(1.0 + 1.0 / alpha)) - scv
        if abs(f) < 1e-12 or hi - lo < 1e-12:
            break
        if f > 0.0:
            lo = alpha
        else:
            hi = alpha
    return alpha


@njit(cache=True)
def eval_ph(betas, sig2s, x, omega):
    """Phase-type channel: hyperexponential when scv >= 1, mixed Erlang below."""
    n = betas.shape[0]
    r = np.empty(n)
    v = np.empty(n)
    summands = np.empty(n - 1)
    trace = np.empty(n - 1, np.int8)
    clamps = 0
    r[0] = betas[0]
    v[0] = sig2s[0]
    for i in range(n - 1):
        mean = r[i]
        var = v[i]
        xi = x[i]
        scv = var / (mean * mean)
        if scv >= 1.0:
            trace[i] = 0
            c = math.sqrt((scv - 1.0) / (scv + 1.0)) if scv > 1.0 else 0.0
            alpha = 0.5 * (1.0 + c)
            m1 = 2.0 * alpha / mean
            m2 = 2.0 * (1.0 - alpha) / mean
            e1 = (alpha / m1) * math.exp(-m1 * xi)
            e2 = ((1.0 - alpha) / m2) * math.exp(-m2 * xi)
            em = e1 + e2
            esm = 2.0 * (e1 / m1 + e2 / m2)
        else:
            trace[i] = 1
            k = int(1.0 / scv) + 1
            while scv * k <= 1.0:
                k += 1
            while k > 2 and scv * (k - 1) > 1.0:
                k -= 1
            if k > ME_MAX_PHASES:
                return r, v, summands, trace, -(i + 1)
            disc = k * (1.0 + scv) - k * k * scv
            if disc < 0.0:
                disc = 0.0
            p = (k * scv - math.sqrt(disc)) / (1.0 + scv)
            if p < 0.0:
                p = 0.0
            elif p > 1.0:
                p = 1.0
            mu = (k - p) / mean
            imu = 1.0 / mu
            if xi == 0.0:
                em = mean
                esm = k * (k + 1.0 - 2.0 * p) * imu * imu
            else:
                t = mu * xi
                if t < 700.0 and k <= 1000:
                    # single Poisson-tail sweep gives Q(k-1), Q(k) and the pmfs
                    term = math.exp(-t)
                    q_low = 0.0
                    prev = 0.0
                    for j in range(k - 1):
                        q_low += term
                        prev = term
                        term *= t / (j + 1.0)
                    q_high = q_low + term
                    km1 = k - 1.0
                    em = p * (q_low * (km1 * imu - xi) + prev * xi) + (1.0 - p) * (
                        q_high * (k * imu - xi) + term * xi
                    )
                    d1 = km1 - t
                    d2 = k - t
                    esm = p * (
                        q_low * (km1 + d1 * d1) * imu * imu + prev * xi * imu * d2
                    ) + (1.0 - p) * (
                        q_high * (k + d2 * d2) * imu * imu + term * xi * imu * (d2 + 1.0)
                    )
                else:
                    # log-domain fallback for extreme arguments
                    lm = math.log(mu)
                    lx = math.log(xi)
                    q_low = _gamma_q(k - 1.0, t)
                    q_high = _gamma_q(float(k), t)
                    pw_low = math.exp((k - 2.0) * lm + (k - 1.0) * lx - t - math.lgamma(k - 1.0))
                    pw_high = math.exp((k - 1.0) * lm + k * lx - t - math.lgamma(float(k)))
                    km1 = k - 1.0
                    em = p * (q_low * (km1 * imu - xi) + pw_low) + (1.0 - p) * (
                        q_high * (k * imu - xi) + pw_high
                    )
                    d1 = km1 - t
                    d2 = k - t
                    esm = p * (
                        q_low * (km1 + d1 * d1) * imu * imu + pw_low * imu * d2
                    ) + (1.0 - p) * (
                        q_high * (k + d2 * d2) * imu * imu + pw_high * imu * (d2 + 1.0)
                    )
        if em < 0.0:
            em = 0.0
        if esm < 0.0:
            esm = 0.0
        summands[i] = em + omega * (xi - mean)
        rn = em + betas[i + 1]
        vn = esm - em * em + sig2s[i + 1]
        floor = 1e-12 * rn * rn
        if vn < floor:
            vn = floor
            clamps += 1
        r[i + 1] = rn
        v[i + 1] = vn
    return r, v, summands, trace, clamps


@njit(cache=True)
def eval_w(betas, sig2s, x, omega):
    """Weibull channel: shape by bisection, excess moments via Gamma(a, u)."""
    n = betas.shape[0]
    r = np.empty(n)
    v = np.empty(n)
    summands = np.empty(n - 1)
    clamps = 0
    r[0] = betas[0]
    v[0] = sig2s[0]
    for i in range(n - 1):
        mean = r[i]
        var = v[i]
        xi = x[i]
        scv = var / (mean * mean)
        alpha = _weibull_shape(scv)
        g1 = math.exp(math.lgamma(1.0 + 1.0 / alpha))
        lam = g1 / mean
        u = (lam * xi) ** alpha
        tail = math.exp(-u)
        gi1 = _gamma_upper(1.0 + 1.0 / alpha, u)
        gi2 = _gamma_upper(1.0 + 2.0 / alpha, u)
        em = gi1 / lam - xi * tail
        esm = gi2 / (lam * lam) - (2.0 * xi / lam) * gi1 + xi * xi * tail
        if em < 0.0:
            em = 0.0
        if esm < 0.0:
            esm = 0.0
        summands[i] = em + omega * (xi - g1 / lam)
        rn = em + betas[i + 1]
        vn = esm - em * em + sig2s[i + 1]
        floor = 1e-12 * rn * rn
        if vn < floor:
            vn = floor
            clamps += 1
        r[i + 1] = rn
        v[i + 1] = vn
    return r, v, summands, clamps


@njit(cache=True)
def eval_ln(betas, sig2s, x, omega):
    """Lognormal channel: excess moments via the standard normal tail."""
    n = betas.shape[0]
    r = np.empty(n)
    v = np.empty(n)
    summands = np.empty(n - 1)
    clamps = 0
    r[0] = betas[0]
    v[0] = sig2s[0]
    inv_sq2 = 1.0 / math.sqrt(2.0)
    for i in range(n - 1):
        mean = r[i]
        var = v[i]
        xi = x[i]
        m2 = mean * mean
        tau2 = math.log1p(var / m2)
        mu = 2.0 * math.log(mean) - 0.5 * math.log(var + m2)
        itau = 1.0 / math.sqrt(tau2)
        lx = math.log(xi) if xi > 0.0 else -np.inf
        z = lx - mu
        t1 = 0.5 * math.erfc((z - tau2) * itau * inv_sq2)
        t0 = 0.5 * math.erfc(z * itau * inv_sq2)
        scale = math.exp(mu + tau2 / 2.0)
        em = scale * t1 - xi * t0
        t2 = 0.5 * math.erfc((z - 2.0 * tau2) * itau * inv_sq2)
        esm = math.exp(2.0 * (mu + tau2)) * t2 - 2.0 * xi * scale * t1 + xi * xi * t0
        if em < 0.0:
            em = 0.0
        if esm < 0.0:
            esm = 0.0
        summands[i] = em + omega * (xi - scale)
        rn = em + betas[i + 1]
        vn = esm - em * em + sig2s[i + 1]
        floor = 1e-12 * rn * rn
        if vn < floor:
            vn = floor
            clamps += 1
        r[i + 1] = rn
        v[i + 1] = vn
    return r, v, summands, clamps


def warm_up() -> None:
    """Trigger compilation (or cache load) of all kernels."""
    betas = np.ones(3)
    sig2s = np.array([1.0, 0.5, 1.5])
    x = np.array([0.0, 1.0])
    eval_ph(betas, sig2s, x, 0.5)
    eval_w(betas, sig2s, x, 0.5)
    eval_ln(betas, sig2s, x, 0.5)
