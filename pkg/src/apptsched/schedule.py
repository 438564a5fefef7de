"""Named appointment-schedule generators.

A schedule for n clients is the vector of n-1 interarrival gaps
x_1..x_{n-1}; the first client arrives at time 0 by convention. Gaps are
in absolute time units; nothing here assumes a unit mean service time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True, slots=True)
class Schedule:
    """Nonnegative interarrival gaps between consecutive appointments."""

    x: tuple[float, ...]

    def __post_init__(self) -> None:
        for i, xi in enumerate(self.x):
            if xi < 0.0:
                raise DomainError(f"schedule gap x[{i}] must be >= 0, got {xi}")

    def __len__(self) -> int:
        return len(self.x)

    def arrival_times(self) -> tuple[float, ...]:
        """Appointment epochs by prefix sums, starting at 0."""
        times = [0.0]
        for xi in self.x:
            times.append(times[-1] + xi)
        return tuple(times)


@dataclass(frozen=True, slots=True)
class ScheduleSpec:
    """Declarative schedule request: kind plus the client count."""

    kind: str
    n: int
    y: float | None = None
    x: tuple[float, ...] | None = None

    KINDS = ("equidistant", "bailey_welch", "bailey_welch_hybrid", "explicit")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown schedule kind {self.kind!r}; expected one of {self.KINDS}")
        if self.n < 1:
            raise DomainError(f"client count must be >= 1, got {self.n}")
        if self.kind in ("equidistant", "bailey_welch_hybrid"):
            if self.y is None or self.y <= 0.0:
                raise DomainError(f"{self.kind} schedule needs a spacing y > 0, got {self.y}")
        if self.kind == "explicit":
            if self.x is None:
                raise DomainError("explicit schedule needs a gap vector x")
            if len(self.x) != self.n - 1:
                raise DomainError(
                    f"explicit schedule for n={self.n} needs {self.n - 1} gaps, got {len(self.x)}"
                )


def materialize(spec: ScheduleSpec) -> Schedule:
    """Turn a ScheduleSpec into the concrete gap vector."""
    d = spec.n - 1
    if spec.kind == "equidistant":
        return Schedule(tuple([spec.y] * d))
    if spec.kind == "bailey_welch":
        return Schedule(tuple([0.0] + [1.0] * (d - 1)) if d else ())
    if spec.kind == "bailey_welch_hybrid":
        return Schedule(tuple([0.0] + [spec.y] * (d - 1)) if d else ())
    return Schedule(tuple(float(v) for v in spec.x))


def equidistant(n: int, y: float) -> Schedule:
    return materialize(ScheduleSpec(kind="equidistant", n=n, y=y))


def bailey_welch(n: int) -> Schedule:
    return materialize(ScheduleSpec(kind="bailey_welch", n=n))


def bailey_welch_hybrid(n: int, y: float) -> Schedule:
    return materialize(ScheduleSpec(kind="bailey_welch_hybrid", n=n, y=y))


def explicit(x) -> Schedule:
    xs = tuple(float(v) for v in x)
    return materialize(ScheduleSpec(kind="explicit", n=len(xs) + 1, x=xs))
