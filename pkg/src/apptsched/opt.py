"""Schedule optimization over nonnegative interarrival gaps.

The approximated loss is convex in the gap vector, so a projected
quasi-Newton search (L-BFGS-B with a zero lower bound on every gap)
driven by finite-difference gradients finds the global minimizer.
Convergence is judged on the projected-gradient infinity norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize as sciopt

from .engine import EngineConfig, ServiceProfile, evaluate_loss, evaluate_loss_grad
from .errors import DomainError
from .schedule import Schedule

DEFAULT_TOL = 1e-6


@dataclass(slots=True)
class OptResult:
    x_star: Schedule
    loss_at_optimum: float
    iterations: int
    converged: bool
    grad_norm: float


def projected_gradient_norm(x: np.ndarray, grad: np.ndarray) -> float:
    """Infinity norm of the gradient projected onto the feasible cone x >= 0."""
    pg = grad.copy()
    at_bound = x <= 0.0
    pg[at_bound] = np.minimum(grad[at_bound], 0.0)
    return float(np.max(np.abs(pg))) if pg.size else 0.0


def optimize(
    profile: ServiceProfile,
    cfg: EngineConfig,
    init: Schedule | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
) -> OptResult:
    """Minimize the approximated loss over gap vectors with x >= 0."""
    if tol <= 0.0:
        raise DomainError(f"tol must be > 0, got {tol}")
    n = profile.n
    d = n - 1
    if max_iter is None:
        max_iter = 500 * n
    if d == 0:
        report = evaluate_loss(profile, Schedule(()), cfg)
        return OptResult(Schedule(()), report.total, 0, True, 0.0)

    if init is None:
        y0 = 1.5 * sum(profile.betas) / n
        x0 = np.full(d, y0)
    else:
        if len(init.x) != d:
            raise DomainError(f"init schedule length {len(init.x)} != n-1 = {d}")
        x0 = np.asarray(init.x, dtype=float)

    def fun(x: np.ndarray) -> float:
        return evaluate_loss(profile, Schedule(tuple(x)), cfg).total

    def jac(x: np.ndarray) -> np.ndarray:
        return evaluate_loss_grad(profile, Schedule(tuple(x)), cfg)

    res = sciopt.minimize(
        fun,
        x0,
        jac=jac,
        method="L-BFGS-B",
        bounds=[(0.0, None)] * d,
        options={"maxiter": max_iter, "maxfun": 50 * max_iter, "ftol": 1e-14, "gtol": tol},
    )

    x_star = np.maximum(res.x, 0.0)
    grad_norm = projected_gradient_norm(x_star, jac(x_star))
    sched = Schedule(tuple(float(v) for v in x_star))
    loss = evaluate_loss(profile, sched, cfg).total
    return OptResult(
        x_star=sched,
        loss_at_optimum=loss,
        iterations=int(res.nit),
        converged=bool(grad_norm < tol),
        grad_norm=grad_norm,
    )


def relative_error(approx: float, reference: float) -> float:
    """|approx - reference| / reference * 100."""
    if reference == 0.0:
        raise DomainError("relative_error needs a nonzero reference")
    return abs(approx - reference) / reference * 100.0


def optimality_gap(loss_a: float, loss_b: float, denominator: str = "min") -> float:
    """Percentage gap between two losses.

    denominator="min" divides by the smaller loss (for comparing two
    heuristic optima); denominator="reference" divides by loss_b.
    """
    if not (math.isfinite(loss_a) and math.isfinite(loss_b)):
        raise DomainError("optimality_gap needs finite losses")
    if denominator == "min":
        denom = min(loss_a, loss_b)
    elif denominator == "reference":
        denom = loss_b
    else:
        raise DomainError(f"denominator must be 'min' or 'reference', got {denominator!r}")
    if denom <= 0.0:
        raise DomainError("optimality_gap needs a positive denominator")
    return abs(loss_a - loss_b) / denom * 100.0
