"""Command-line front end.

Subcommands: loss | optimize | simulate | tables | bench. Run
configurations come from a JSON file; --seed and the APPTSCHED_SEED
environment variable override the configured simulation seed (flag wins
over env wins over file). Exit codes: 0 success, 2 invalid configuration,
3 numeric failure. All floats are printed with 10 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .engine import EngineConfig, ServiceProfile, evaluate_loss
from .errors import ConvergenceError, DegenerateInputError, DomainError
from .experiments import TABLE_KINDS, ScenarioGrid, run_table, run_timing
from .opt import optimize
from .schedule import Schedule, ScheduleSpec, materialize
from .sim import SimConfig, simulate_loss

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_FAMILY_CODES = {"ph": "PH", "w": "W", "ln": "LN"}


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending field."""


def _round10(value):
    """Round floats to 10 significant digits, recursively."""
    if isinstance(value, float):
        if not math.isfinite(value):
            return value
        return float(f"{value:.10g}")
    if isinstance(value, dict):
        return {k: _round10(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round10(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_round10(float(v)) for v in value]
    return value


def emit_json(payload: dict) -> None:
    print(json.dumps(_round10(payload)))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.10g}"
    return str(value)


class RunConfig:
    """Validated view of the JSON run configuration."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a JSON object")
        self.raw = raw
        self.n = self._positive_int("n")
        self.omega = self._weight("omega", default=0.5)
        self.betas = self._vector("beta", "betas", positive=True)
        self.sigma2s = self._vector("sigma2", "sigma2s", positive=True)
        self.family = self._family(raw.get("family", "ph"))
        sim = raw.get("sim", {})
        if not isinstance(sim, dict):
            raise ConfigError("sim: must be an object")
        self.runs = self._positive_int("sim.runs", sim.get("runs", 100_000))
        seed = sim.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError(f"sim.seed: must be an integer, got {seed!r}")
        self.seed = seed
        optimizer = raw.get("optimizer", {})
        if not isinstance(optimizer, dict):
            raise ConfigError("optimizer: must be an object")
        self.tol = optimizer.get("tol", 1e-6)
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise ConfigError(f"optimizer.tol: must be > 0, got {self.tol!r}")
        self.max_iter = optimizer.get("max_iter")
        if self.max_iter is not None and not (
            isinstance(self.max_iter, int) and self.max_iter > 0
        ):
            raise ConfigError(f"optimizer.max_iter: must be a positive integer, got {self.max_iter!r}")

    def _positive_int(self, field: str, value=None) -> int:
        if value is None:
            value = self.raw.get(field)
        if not isinstance(value, int) or value < 1:
            raise ConfigError(f"{field}: must be a positive integer, got {value!r}")
        return value

    def _weight(self, field: str, default: float) -> float:
        value = self.raw.get(field, default)
        if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
            raise ConfigError(f"{field}: must lie in [0, 1], got {value!r}")
        return float(value)

    def _vector(self, scalar_key: str, vector_key: str, positive: bool) -> tuple[float, ...]:
        if vector_key in self.raw:
            values = self.raw[vector_key]
            if not isinstance(values, list) or len(values) != self.n:
                raise ConfigError(f"{vector_key}: must be a list of length n = {self.n}")
        elif scalar_key in self.raw:
            values = [self.raw[scalar_key]] * self.n
        else:
            raise ConfigError(f"{scalar_key}/{vector_key}: missing")
        out = []
        for i, v in enumerate(values):
            if not isinstance(v, (int, float)) or (positive and v <= 0):
                raise ConfigError(f"{vector_key}[{i}]: must be > 0, got {v!r}")
            out.append(float(v))
        return tuple(out)

    @staticmethod
    def _family(value) -> str:
        if not isinstance(value, str) or value.lower() not in _FAMILY_CODES:
            raise ConfigError(f"family: must be one of ph|w|ln, got {value!r}")
        return _FAMILY_CODES[value.lower()]

    def profile(self) -> ServiceProfile:
        try:
            return ServiceProfile(betas=self.betas, sigma2s=self.sigma2s)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def schedule(self) -> Schedule:
        raw = self.raw.get("schedule")
        if not isinstance(raw, dict):
            raise ConfigError("schedule: must be an object with a 'kind'")
        kind = raw.get("kind")
        try:
            if kind == "explicit":
                x = raw.get("x")
                if not isinstance(x, list):
                    raise ConfigError("schedule.x: must be a list of gaps")
                spec = ScheduleSpec(kind="explicit", n=self.n, x=tuple(float(v) for v in x))
            else:
                spec = ScheduleSpec(kind=str(kind), n=self.n, y=raw.get("y"))
            return materialize(spec)
        except DomainError as exc:
            raise ConfigError(f"schedule: {exc}") from exc


def _load_config(path: str) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from exc
    return RunConfig(raw)


def _apply_overrides(cfg: RunConfig, args) -> None:
    if getattr(args, "family", None):
        cfg.family = RunConfig._family(args.family)
    env_seed = os.environ.get("APPTSCHED_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"APPTSCHED_SEED: must be an integer, got {env_seed!r}") from exc
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed


def cmd_loss(args) -> int:
    cfg = _load_config(args.config)
    _apply_overrides(cfg, args)
    report = evaluate_loss(cfg.profile(), cfg.schedule(), EngineConfig(cfg.omega, cfg.family))
    emit_json(
        {
            "total": report.total,
            "r": report.r,
            "v": report.v,
            "per_summand": report.per_summand,
            "family_trace": report.family_trace,
        }
    )
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _load_config(args.config)
    _apply_overrides(cfg, args)
    result = optimize(
        cfg.profile(),
        EngineConfig(cfg.omega, cfg.family),
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )
    emit_json(
        {
            "x_star": list(result.x_star.x),
            "loss": result.loss_at_optimum,
            "iterations": result.iterations,
            "converged": result.converged,
            "grad_norm": result.grad_norm,
        }
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    _apply_overrides(cfg, args)
    result = simulate_loss(
        cfg.profile(),
        cfg.schedule(),
        SimConfig(runs=cfg.runs, seed=cfg.seed, service_family=cfg.family, omega=cfg.omega),
        workers=args.workers,
    )
    emit_json(
        {
            "loss_mean": result.loss_mean,
            "loss_stderr": result.loss_stderr,
            "wait_means": result.wait_means,
            "idle_means": result.idle_means,
            "runs": result.runs,
            "seed": result.seed,
        }
    )
    return EXIT_OK


_TABLE_HEADER = ("table_id", "scenario", "scv_or_label", "y", "family", "value_kind", "value", "stderr")


def cmd_tables(args) -> int:
    grid_kwargs = {}
    if args.config:
        cfg = _load_config(args.config)
        _apply_overrides(cfg, args)
        grid_kwargs = {"n": cfg.n, "omega": cfg.omega, "runs": cfg.runs, "seed": cfg.seed}
    elif getattr(args, "seed", None) is not None:
        grid_kwargs = {"seed": args.seed}
    grid = ScenarioGrid(**grid_kwargs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    which = TABLE_KINDS if args.which == "all" else (args.which,)
    for table in which:
        records = run_table(grid, table, workers=args.workers)
        path = out_dir / f"{table}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_TABLE_HEADER)
            for rec in records:
                writer.writerow(
                    [
                        rec.table_id,
                        rec.scenario,
                        rec.scv_or_label,
                        rec.y,
                        rec.family,
                        rec.value_kind,
                        _fmt(rec.value),
                        _fmt(rec.stderr),
                    ]
                )
        print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(args) -> int:
    n_values = tuple(int(v) for v in args.n.split(","))
    records = run_timing(
        n_values,
        reps=args.reps,
        include_optimize=args.optimize,
        include_sim_benchmark=args.sim_benchmark,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("n", "family", "op", "median_seconds", "reps"))
        for rec in records:
            writer.writerow([rec.n, rec.family, rec.op, _fmt(rec.median_seconds), rec.reps])
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apptsched",
        description="Evaluate, simulate and optimize appointment-schedule losses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="path to a JSON run configuration")
        p.add_argument("--family", choices=sorted(_FAMILY_CODES), help="override the fit family")
        p.add_argument("--seed", type=int, help="override the simulation seed")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                       help="parallel workers for simulation chunks")

    p_loss = sub.add_parser("loss", help="evaluate the approximated loss for a schedule")
    common(p_loss)
    p_loss.set_defaults(func=cmd_loss)

    p_opt = sub.add_parser("optimize", help="minimize the approximated loss over schedules")
    common(p_opt)
    p_opt.set_defaults(func=cmd_optimize)

    p_sim = sub.add_parser("simulate", help="Monte Carlo benchmark of a schedule")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_tab = sub.add_parser("tables", help="regenerate benchmark tables as CSV")
    common(p_tab, config_required=False)
    p_tab.add_argument("--which", default="all", choices=("all",) + TABLE_KINDS)
    p_tab.add_argument("--out", required=True, help="output directory for CSV files")
    p_tab.set_defaults(func=cmd_tables)

    p_bench = sub.add_parser("bench", help="timing curves as CSV")
    p_bench.add_argument("--n", default="5,10,15,20,25,30,35,40", help="comma-separated client counts")
    p_bench.add_argument("--out", required=True, help="output CSV path")
    p_bench.add_argument("--reps", type=int, default=21)
    p_bench.add_argument("--optimize", action="store_true", help="also time schedule optimization")
    p_bench.add_argument("--sim-benchmark", action="store_true",
                         help="also time the Monte Carlo benchmark")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, DegenerateInputError, ConvergenceError, OverflowError,
            FloatingPointError, RuntimeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
