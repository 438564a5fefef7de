"""Seeded Monte Carlo benchmark for the schedule loss.

Simulates the waiting/idle recursion with service times drawn from the
two-moment fit of each client's (beta, sigma^2) in the configured family
and averages the weighted loss over many runs.

Reproducibility: runs are processed in fixed-size chunks and chunk c
draws from a counter-based Philox stream keyed by (seed, c). Chunks are
reduced in index order, so the result is bit-identical for a given
(seed, runs) no matter how many workers execute the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dist import SojournFit
from .engine import ServiceProfile
from .errors import DomainError
from .fit import MomentPair, fit_lognormal, fit_phase_type, fit_weibull
from .schedule import Schedule

_CHUNK = 4096
_ACCOUNTING_TOL = 1e-10

SERVICE_FAMILIES = ("PH", "W", "LN")


@dataclass(frozen=True, slots=True)
class SimConfig:
    runs: int = 100_000
    seed: int = 0
    service_family: str = "PH"
    omega: float = 0.5

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise DomainError(f"runs must be >= 1, got {self.runs}")
        if self.service_family not in SERVICE_FAMILIES:
            raise DomainError(
                f"service_family must be one of {SERVICE_FAMILIES}, got {self.service_family!r}"
            )
        if not 0.0 <= self.omega <= 1.0:
            raise DomainError(f"omega must lie in [0, 1], got {self.omega}")


@dataclass(slots=True)
class SimResult:
    loss_mean: float
    loss_stderr: float
    wait_means: list[float]
    idle_means: list[float]
    runs: int
    seed: int
    accounting_gap: float = 0.0


def _service_fits(profile: ServiceProfile, family: str) -> list[SojournFit]:
    fits = []
    for beta, sigma2 in zip(profile.betas, profile.sigma2s):
        m = MomentPair(beta, sigma2)
        if family == "PH":
            fits.append(fit_phase_type(m))
        elif family == "W":
            fits.append(fit_weibull(m))
        else:
            fits.append(fit_lognormal(m))
    return fits


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, chunk_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _simulate_chunk(
    fits: list[SojournFit],
    x: np.ndarray,
    omega: float,
    seed: int,
    chunk_index: int,
    m: int,
):
    n = len(fits)
    rng = _chunk_rng(seed, chunk_index)
    services = np.empty((m, n))
    for j, fit in enumerate(fits):
        services[:, j] = fit.sample(rng, size=m)

    wait = np.zeros(m)
    sum_wait = np.zeros(n)
    sum_idle = np.zeros(n)
    acc_wait = np.zeros(m)
    acc_idle = np.zeros(m)
    sojourn_form = np.zeros(m)
    for j in range(n - 1):
        sojourn = wait + services[:, j]
        over = sojourn - x[j]
        wait = np.maximum(over, 0.0)
        idle = np.maximum(-over, 0.0)
        sum_wait[j + 1] = wait.sum()
        sum_idle[j + 1] = idle.sum()
        acc_wait += wait
        acc_idle += idle
        sojourn_form += np.maximum(over, 0.0) + omega * (x[j] - sojourn)

    per_run = omega * acc_idle + (1.0 - omega) * acc_wait
    gap = float(np.max(np.abs(per_run - sojourn_form))) if n > 1 else 0.0
    return float(per_run.sum()), float(per_run @ per_run), sum_wait, sum_idle, gap


def simulate_loss(
    profile: ServiceProfile,
    sched: Schedule,
    cfg: SimConfig,
    workers: int = 1,
) -> SimResult:
    """Estimate the loss, per-client waits and idles by Monte Carlo."""
    n = profile.n
    if len(sched.x) != n - 1:
        raise DomainError(
            f"schedule length {len(sched.x)} does not match n-1 = {n - 1} for {n} clients"
        )
    fits = _service_fits(profile, cfg.service_family)
    x = np.asarray(sched.x, dtype=float)
    runs = cfg.runs

    sizes = [_CHUNK] * (runs // _CHUNK)
    if runs % _CHUNK:
        sizes.append(runs % _CHUNK)

    def work(args):
        index, size = args
        return _simulate_chunk(fits, x, cfg.omega, cfg.seed, index, size)

    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(work, jobs))
    else:
        partials = [work(j) for j in jobs]

    loss_sum = 0.0
    loss_sq_sum = 0.0
    wait_sum = np.zeros(n)
    idle_sum = np.zeros(n)
    worst_gap = 0.0
    for s, ss, w, idl, gap in partials:
        loss_sum += s
        loss_sq_sum += ss
        wait_sum += w
        idle_sum += idl
        worst_gap = max(worst_gap, gap)

    if worst_gap > _ACCOUNTING_TOL:
        raise RuntimeError(
            f"loss accountings disagree: idle/wait vs sojourn form differ by {worst_gap:.3e}"
        )

    loss_mean = float(loss_sum / runs)
    if runs > 1:
        sample_var = max(0.0, (loss_sq_sum - runs * loss_mean * loss_mean) / (runs - 1))
        stderr = float(math.sqrt(sample_var / runs))
    else:
        stderr = 0.0
    return SimResult(
        loss_mean=loss_mean,
        loss_stderr=stderr,
        wait_means=[float(w / runs) for w in wait_sum],
        idle_means=[float(v / runs) for v in idle_sum],
        runs=runs,
        seed=cfg.seed,
        accounting_gap=worst_gap,
    )
