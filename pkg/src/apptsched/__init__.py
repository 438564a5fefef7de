"""Fast appointment-schedule loss evaluation and optimization.

The expected weighted sum of server idle time and client waiting time is
evaluated in one O(n) sweep by propagating each client's sojourn-time
mean and variance through the queue recursion with a two-moment
distribution fit (phase-type, Weibull or Lognormal), and minimized over
nonnegative interarrival gaps. A seeded Monte Carlo simulator provides
the benchmark.
"""

from .dist import (
    HyperExp,
    LogNormalDist,
    MixedErlang,
    SojournFit,
    WeibullDist,
    loss_summand,
    sample,
)
from .engine import (
    EngineConfig,
    LossReport,
    ServiceProfile,
    evaluate_loss,
    evaluate_loss_grad,
)
from .errors import ConvergenceError, DegenerateInputError, DomainError
from .fit import MomentPair, fit_lognormal, fit_phase_type, fit_weibull
from .opt import OptResult, optimality_gap, optimize, relative_error
from .schedule import (
    Schedule,
    ScheduleSpec,
    bailey_welch,
    bailey_welch_hybrid,
    equidistant,
    explicit,
    materialize,
)
from .sim import SimConfig, SimResult, simulate_loss

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DegenerateInputError",
    "DomainError",
    "EngineConfig",
    "HyperExp",
    "LogNormalDist",
    "LossReport",
    "MixedErlang",
    "MomentPair",
    "OptResult",
    "Schedule",
    "ScheduleSpec",
    "ServiceProfile",
    "SimConfig",
    "SimResult",
    "SojournFit",
    "WeibullDist",
    "bailey_welch",
    "bailey_welch_hybrid",
    "equidistant",
    "evaluate_loss",
    "evaluate_loss_grad",
    "explicit",
    "fit_lognormal",
    "fit_phase_type",
    "fit_weibull",
    "loss_summand",
    "materialize",
    "optimality_gap",
    "optimize",
    "relative_error",
    "sample",
    "simulate_loss",
]
