"""Linear-time loss evaluation by propagating sojourn-time moments.

One pass over the clients: fit the current sojourn moments (r_i, v_i) in
the configured family, add that fit's loss term for the gap x_i, then
push the moments through the queue step

    r_{i+1} = E(R_i - x_i)+ + beta_{i+1}
    v_{i+1} = E((R_i - x_i)+)^2 - (E(R_i - x_i)+)^2 + sigma_{i+1}^2

using the family's closed-form excess moments. The whole evaluation is
O(n) and pure, so callers may run many of them concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import DegenerateInputError, DomainError
from .schedule import Schedule

FAMILIES = ("PH", "W", "LN")

_V_FLOOR_REL = 1e-12


@lru_cache(maxsize=1024)
def _as_array(values: tuple[float, ...]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True)
class ServiceProfile:
    """Per-client service-time means and variances."""

    betas: tuple[float, ...]
    sigma2s: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.betas) != len(self.sigma2s):
            raise DomainError(
                f"betas and sigma2s must have equal length, got {len(self.betas)} vs {len(self.sigma2s)}"
            )
        if len(self.betas) < 1:
            raise DomainError("service profile needs at least one client")
        for i, b in enumerate(self.betas):
            if b <= 0.0:
                raise DomainError(f"betas[{i}] must be > 0, got {b}")
        for i, s in enumerate(self.sigma2s):
            if s <= 0.0:
                raise DomainError(f"sigma2s[{i}] must be > 0, got {s}")

    @property
    def n(self) -> int:
        return len(self.betas)

    @staticmethod
    def homogeneous(n: int, beta: float, sigma2: float) -> "ServiceProfile":
        return ServiceProfile(betas=(beta,) * n, sigma2s=(sigma2,) * n)


@dataclass(frozen=True, slots=True)
class EngineConfig:
    """Loss weight and the approximation family used for the sojourn fits."""

    omega: float = 0.5
    family: str = "PH"

    def __post_init__(self) -> None:
        if not 0.0 <= self.omega <= 1.0:
            raise DomainError(f"omega must lie in [0, 1], got {self.omega}")
        if self.family not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}, got {self.family!r}")


@dataclass(slots=True)
class LossReport:
    """Moment trajectory and per-client loss terms for one evaluation."""

    r: np.ndarray
    v: np.ndarray
    per_summand: np.ndarray
    total: float
    omega: float
    variance_clamps: int = 0
    _trace: np.ndarray | str = "PH"

    @property
    def family_trace(self) -> list[str]:
        """Fit family used at each step ("HE"/"ME" for the PH channel)."""
        if isinstance(self._trace, str):
            return [self._trace] * len(self.per_summand)
        return ["HE" if c == 0 else "ME" for c in self._trace]


def evaluate_loss(profile: ServiceProfile, sched: Schedule, cfg: EngineConfig) -> LossReport:
    """Approximate the schedule loss; runs one fit and one queue step per client."""
    n = profile.n
    if len(sched.x) != n - 1:
        raise DomainError(
            f"schedule length {len(sched.x)} does not match n-1 = {n - 1} for {n} clients"
        )
    betas = _as_array(profile.betas)
    sigma2s = _as_array(profile.sigma2s)
    x = _as_array(sched.x)
    omega, family = cfg.omega, cfg.family

    if family == "PH":
        r, v, summands, codes, clamps = _kernels.eval_ph(betas, sigma2s, x, omega)
        if clamps < 0:
            step = -clamps - 1
            raise DegenerateInputError(
                f"mixed-Erlang fit at step {step} needs more than "
                f"{_kernels.ME_MAX_PHASES} phases (sojourn scv too small)"
            )
        trace: np.ndarray | str = codes
    else:
        kernel = _kernels.eval_w if family == "W" else _kernels.eval_ln
        r, v, summands, clamps = kernel(betas, sigma2s, x, omega)
        trace = family

    return LossReport(
        r=r,
        v=v,
        per_summand=summands,
        total=float(np.sum(summands)),
        omega=omega,
        variance_clamps=int(clamps),
        _trace=trace,
    )


def evaluate_loss_grad(
    profile: ServiceProfile,
    sched: Schedule,
    cfg: EngineConfig,
    h: float | None = None,
) -> np.ndarray:
    """Finite-difference gradient of the total loss w.r.t. each gap.

    Central differences in the interior; a gap too close to zero falls
    back to a forward difference so the evaluation never leaves x >= 0.
    """
    x = list(sched.x)
    d = len(x)
    grad = np.empty(d)
    base: float | None = None

    def loss_at(values: list[float]) -> float:
        return evaluate_loss(profile, Schedule(tuple(values)), cfg).total

    for i in range(d):
        xi = x[i]
        hi = h if h is not None else 1e-6 * max(1.0, xi)
        if xi >= hi:
            x[i] = xi + hi
            up = loss_at(x)
            x[i] = xi - hi
            down = loss_at(x)
            grad[i] = (up - down) / (2.0 * hi)
        else:
            if base is None:
                base = loss_at(x)
            x[i] = xi + hi
            up = loss_at(x)
            grad[i] = (up - base) / hi
        x[i] = xi
    return grad
