"""Special functions backing the closed-form excess and loss expressions.

Everything operates on double precision. The incomplete-gamma code follows
the classic series / continued-fraction split: the regularized lower
function is summed as a power series for t < a + 1, and the regularized
upper function is evaluated with a modified Lentz continued fraction
otherwise. Unregularized values are reassembled through the log-gamma
function so that large shapes never overflow intermediate terms.
"""

from __future__ import annotations

import math

from .errors import ConvergenceError, DomainError

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_ITMAX = 10_000

# exp() overflows past this; callers get inf for larger log-values
_MAX_EXP_ARG = 709.0


def log_gamma(a: float) -> float:
    """ln Gamma(a) for a > 0."""
    if a <= 0.0:
        raise DomainError(f"log_gamma requires a > 0, got {a}")
    return math.lgamma(a)


def _lower_series(a: float, t: float) -> float:
    """Regularized lower incomplete gamma P(a, t) by power series (t < a + 1)."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_ITMAX):
        ap += 1.0
        term *= t / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-t + a * math.log(t) - math.lgamma(a))
    raise ConvergenceError(f"incomplete gamma series stalled at a={a}, t={t}")


def _upper_continued_fraction(a: float, t: float) -> float:
    """Regularized upper incomplete gamma Q(a, t) via modified Lentz (t >= a + 1)."""
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
            return math.exp(-t + a * math.log(t) - math.lgamma(a)) * h
    raise ConvergenceError(f"incomplete gamma continued fraction stalled at a={a}, t={t}")


def regularized_gamma_q(a: float, t: float) -> float:
    """Q(a, t) = Gamma(a, t) / Gamma(a), the regularized upper incomplete gamma."""
    if a <= 0.0:
        raise DomainError(f"regularized_gamma_q requires a > 0, got {a}")
    if t < 0.0:
        raise DomainError(f"regularized_gamma_q requires t >= 0, got {t}")
    if t == 0.0:
        return 1.0
    if t < a + 1.0:
        return 1.0 - _lower_series(a, t)
    return _upper_continued_fraction(a, t)


def log_upper_incomplete_gamma(a: float, t: float) -> float:
    """ln Gamma(a, t); safe for shapes where Gamma(a, t) itself overflows."""
    q = regularized_gamma_q(a, t)
    if q == 0.0:
        return -math.inf
    return math.lgamma(a) + math.log(q)


def upper_incomplete_gamma(a: float, t: float) -> float:
    """Unregularized upper incomplete gamma Gamma(a, t) = int_t^inf z^(a-1) e^-z dz.

    Gamma(a, 0) = Gamma(a). Values beyond double range come back as inf;
    use log_upper_incomplete_gamma or regularized_gamma_q for large shapes.
    """
    logv = log_upper_incomplete_gamma(a, t)
    if logv == -math.inf:
        return 0.0
    if logv > _MAX_EXP_ARG:
        return math.inf
    return math.exp(logv)


def upper_incomplete_gamma_int(k: int, t: float) -> float:
    """Gamma(k, t) for integer k >= 1 via the finite Poisson-tail sum.

    Gamma(k, t) / (k-1)! = e^-t * sum_{i<k} t^i / i!; the sum is taken in
    the log domain so large t and k stay stable.
    """
    if not isinstance(k, int) or k < 1:
        raise DomainError(f"upper_incomplete_gamma_int requires integer k >= 1, got {k}")
    if t < 0.0:
        raise DomainError(f"upper_incomplete_gamma_int requires t >= 0, got {t}")
    if t == 0.0:
        return math.exp(math.lgamma(k))
    log_t = math.log(t)
    log_terms = [i * log_t - math.lgamma(i + 1) for i in range(k)]
    top = max(log_terms)
    acc = sum(math.exp(lt - top) for lt in log_terms)
    logv = math.lgamma(k) - t + top + math.log(acc)
    if logv > _MAX_EXP_ARG:
        return math.inf
    return math.exp(logv)


_SQRT2 = math.sqrt(2.0)


def normal_tail(x: float) -> float:
    """Standard normal complementary CDF Psi(x) = P(N(0,1) > x).

    Accepts +-inf sentinels (returning 0 / 1) so that log-of-zero limits
    in the lognormal formulas stay well defined.
    """
    if math.isnan(x):
        raise DomainError("normal_tail is undefined for NaN")
    return 0.5 * math.erfc(x / _SQRT2)
