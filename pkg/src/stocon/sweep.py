"""Experiment harness: seeded parameter sweeps producing figure-ready CSVs.

Three experiment families, one CSV each:

* fig4.csv - mean cost vs the original activity's probability, per
  distribution size, everything uncertain, plus deterministic reference
  rows at probability 1 (from the original log and, when a
  pre-modification mode is active, from the pre-modified log too).
* fig5.csv - mean cost vs the uncertain fraction, one series per
  probability value and profile, per pre-modification mode.
* fig6.csv - mean cost vs original trace-length bucket.

All rows are deterministic for a fixed (input, seed): no timings, fixed
ordering, 10-significant-digit numbers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .align import CostProfile, LogAlignmentResult, ProfileKind, align_log
from .errors import StoconError, ValidationError
from .logs import StochasticLog, StochasticTrace
from .perturb import PerturbConfig, PerturbMode, generate_experiment_log
from .petri import SystemNet

DEFAULT_PF_SERIES = (0.55, 0.75, 0.95)
DEFAULT_PF_GRID = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))  # 0.50 .. 0.95
DEFAULT_BUCKETS = ((0, 9), (10, 29), (30, 49), (50, None))

FIG4_COLUMNS = ("mode", "series", "n_t", "p_f", "mean_cost", "std_cost", "n_traces", "n_failures")
FIG5_COLUMNS = ("mode", "series", "p_f", "t_p", "mean_cost", "std_cost", "n_traces", "n_failures")
FIG6_COLUMNS = ("series", "p_f", "bucket", "bucket_low", "mean_cost", "std_cost", "n_traces", "n_failures")
ERROR_COLUMNS = ("figure", "mode", "series", "n_t", "p_f", "t_p", "bucket", "case_id", "error")
SELFCHECK_COLUMNS = ("check", "status", "detail")


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition for one sweep run.

    ``pf_values`` drives the fig5/fig6 series; ``pf_grid`` is the finer
    x-axis of fig4. ``repetitions`` reruns every point with seeds
    seed, seed+1, ... and aggregates all per-trace costs together.
    """

    pf_values: tuple[float, ...] = DEFAULT_PF_SERIES
    pf_grid: tuple[float, ...] = DEFAULT_PF_GRID
    tp_step: float = 0.05
    nt_values: tuple[int, ...] = (2, 3, 4)
    modes: tuple[PerturbMode, ...] = (PerturbMode.NONE,)
    profiles: tuple[ProfileKind, ...] = (ProfileKind.STOCHASTIC, ProfileKind.LOWER_BOUND)
    seed: int = 0
    repetitions: int = 1
    mode_fraction: float = 0.3
    buckets: tuple[tuple[int, int | None], ...] = DEFAULT_BUCKETS

    def __post_init__(self):
        for name in ("pf_values", "pf_grid", "nt_values", "modes", "profiles"):
            if not getattr(self, name):
                raise ValidationError(f"sweep spec: {name} must be nonempty")
        if self.tp_step <= 0:
            raise ValidationError("sweep spec: tp_step must be positive")
        if self.repetitions < 1:
            raise ValidationError("sweep spec: repetitions must be >= 1")

    def tp_values(self) -> list[float]:
        steps = round(1.0 / self.tp_step)
        if abs(steps * self.tp_step - 1.0) > 1e-9:
            raise ValidationError("sweep spec: tp_step must divide 1.0")
        return [round(i * self.tp_step, 10) for i in range(steps + 1)]

    def bucket_of(self, length: int) -> tuple[int, int | None] | None:
        for low, high in self.buckets:
            if length >= low and (high is None or length <= high):
                return (low, high)
        return None


def _bucket_label(bucket: tuple[int, int | None]) -> str:
    low, high = bucket
    return f"{low}+" if high is None else f"{low}-{high}"


@dataclass
class SweepResult:
    fig4_rows: list[dict] = field(default_factory=list)
    fig5_rows: list[dict] = field(default_factory=list)
    fig6_rows: list[dict] = field(default_factory=list)
    error_rows: list[dict] = field(default_factory=list)
    selfcheck_rows: list[dict] = field(default_factory=list)

    @property
    def selfchecks_passed(self) -> bool:
        return all(row["status"] == "PASS" for row in self.selfcheck_rows)

    def write(self, out_dir) -> None:
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "fig4.csv", FIG4_COLUMNS, self.fig4_rows)
        write_csv(out / "fig5.csv", FIG5_COLUMNS, self.fig5_rows)
        write_csv(out / "fig6.csv", FIG6_COLUMNS, self.fig6_rows)
        write_csv(out / "errors.csv", ERROR_COLUMNS, self.error_rows)
        write_csv(out / "selfcheck.csv", SELFCHECK_COLUMNS, self.selfcheck_rows)


def format_number(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".10g")
    return str(value)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(row.get(col, "")) for col in columns])


def _mean_std(costs: list[float]) -> tuple[float, float]:
    if not costs:
        return (math.nan, math.nan)
    mean = sum(costs) / len(costs)
    var = sum((c - mean) ** 2 for c in costs) / len(costs)
    return (mean, math.sqrt(var))


class _Runner:
    """Shared machinery: generate a perturbed log, align it, pool costs."""

    def __init__(self, model, base_log, spec, *, heuristic, node_cap, threads):
        self.model = model
        self.base_log = base_log
        self.spec = spec
        self.heuristic = heuristic
        self.node_cap = node_cap
        self.threads = threads

    def align(self, log: StochasticLog, profile: CostProfile) -> LogAlignmentResult:
        return align_log(
            self.model,
            log,
            profile,
            heuristic=self.heuristic,
            node_cap=self.node_cap,
            threads=self.threads,
        )

    def run_point(self, config_for_seed, profile: CostProfile, coords: dict, figure: str, errors):
        """Aggregate per-trace costs over all repetitions of one grid point.

        Returns (costs ordered by rep then trace, per-trace results for
        bucket grouping, failure count); None when generation failed.
        """
        costs: list[float] = []
        per_trace: list[tuple[StochasticTrace, float | None]] = []
        failures = 0
        for rep in range(self.spec.repetitions):
            config = config_for_seed(self.spec.seed + rep)
            try:
                log = generate_experiment_log(self.base_log, config)
            except StoconError as e:
                errors.append(
                    {**coords, "figure": figure, "case_id": "*", "error": str(e)}
                )
                return None
            result = self.align(log, profile)
            for base_trace, trace_result in zip(self.base_log.traces, result.results):
                if trace_result.error is not None:
                    failures += 1
                    errors.append(
                        {
                            **coords,
                            "figure": figure,
                            "case_id": trace_result.case_id,
                            "error": trace_result.error,
                        }
                    )
                    per_trace.append((base_trace, None))
                else:
                    cost = trace_result.alignment.total_cost
                    costs.append(cost)
                    per_trace.append((base_trace, cost))
        return costs, per_trace, failures


def run_sweep(
    model: SystemNet,
    base_log: StochasticLog,
    spec: SweepSpec,
    *,
    heuristic: bool = True,
    node_cap: int = 1_000_000,
    threads: int | None = None,
) -> SweepResult:
    """Run the three experiment families plus the harness self-checks.

    The input log must be deterministic; per-point and per-trace failures
    are recorded in the error rows and never abort the sweep.
    """
    if not base_log.is_deterministic:
        raise ValidationError("sweep requires a deterministic input log")
    result = SweepResult()
    runner = _Runner(
        model, base_log, spec, heuristic=heuristic, node_cap=node_cap, threads=threads
    )
    _run_fig4(runner, result)
    _run_fig5(runner, result)
    _run_fig6(runner, result)
    _run_selfchecks(runner, result)
    return result


def _profile_for(kind: ProfileKind) -> CostProfile:
    return CostProfile(kind)


def _series_name(kind: ProfileKind) -> str:
    return kind.value


def _run_fig4(runner: _Runner, result: SweepResult) -> None:
    spec = runner.spec
    stochastic = CostProfile.stochastic()
    deterministic = CostProfile.deterministic()
    for mode in spec.modes:
        for nt in spec.nt_values:
            for pf in spec.pf_grid:
                coords = {"mode": mode.value, "series": "stochastic", "n_t": nt, "p_f": pf}
                point = runner.run_point(
                    lambda s, nt=nt, pf=pf, mode=mode: PerturbConfig(
                        nt, pf, 1.0, mode, spec.mode_fraction, s
                    ),
                    stochastic,
                    coords,
                    "fig4",
                    result.error_rows,
                )
                if point is None:
                    continue
                costs, _, failures = point
                mean, std = _mean_std(costs)
                result.fig4_rows.append(
                    {**coords, "mean_cost": mean, "std_cost": std,
                     "n_traces": len(costs), "n_failures": failures}
                )
        # deterministic reference rows at p_f = 1
        reference = runner.align(runner.base_log, deterministic)
        mean, std = _mean_std(reference.costs)
        result.fig4_rows.append(
            {
                "mode": mode.value, "series": "reference_original", "n_t": "", "p_f": 1.0,
                "mean_cost": mean, "std_cost": std,
                "n_traces": len(reference.costs), "n_failures": len(reference.failures),
            }
        )
        if mode is not PerturbMode.NONE:
            coords = {"mode": mode.value, "series": "reference_premodified", "n_t": "", "p_f": 1.0}
            point = runner.run_point(
                lambda s, mode=mode: PerturbConfig(
                    2, 1.0, 0.0, mode, spec.mode_fraction, s
                ),
                deterministic,
                coords,
                "fig4",
                result.error_rows,
            )
            if point is not None:
                costs, _, failures = point
                mean, std = _mean_std(costs)
                result.fig4_rows.append(
                    {**coords, "mean_cost": mean, "std_cost": std,
                     "n_traces": len(costs), "n_failures": failures}
                )


def _run_fig5(runner: _Runner, result: SweepResult) -> None:
    spec = runner.spec
    nt = spec.nt_values[0]
    for mode in spec.modes:
        for tp in spec.tp_values():
            for kind in spec.profiles:
                pf_list = spec.pf_values if kind is ProfileKind.STOCHASTIC else (spec.pf_values[0],)
                for pf in pf_list:
                    coords = {
                        "mode": mode.value, "series": _series_name(kind), "p_f": pf, "t_p": tp,
                    }
                    point = runner.run_point(
                        lambda s, pf=pf, tp=tp, mode=mode: PerturbConfig(
                            nt, pf, tp, mode, spec.mode_fraction, s
                        ),
                        _profile_for(kind),
                        coords,
                        "fig5",
                        result.error_rows,
                    )
                    if point is None:
                        continue
                    costs, _, failures = point
                    mean, std = _mean_std(costs)
                    result.fig5_rows.append(
                        {**coords, "mean_cost": mean, "std_cost": std,
                         "n_traces": len(costs), "n_failures": failures}
                    )


def _run_fig6(runner: _Runner, result: SweepResult) -> None:
    spec = runner.spec
    nt = spec.nt_values[0]
    for kind in spec.profiles:
        pf_list = spec.pf_values if kind is ProfileKind.STOCHASTIC else (spec.pf_values[0],)
        for pf in pf_list:
            coords = {"series": _series_name(kind), "p_f": pf}
            point = runner.run_point(
                lambda s, pf=pf: PerturbConfig(nt, pf, 1.0, PerturbMode.NONE, spec.mode_fraction, s),
                _profile_for(kind),
                coords,
                "fig6",
                result.error_rows,
            )
            if point is None:
                continue
            _, per_trace, _ = point
            grouped: dict[tuple[int, int | None], list[float]] = {}
            failed: dict[tuple[int, int | None], int] = {}
            for base_trace, cost in per_trace:
                bucket = spec.bucket_of(len(base_trace))
                if bucket is None:
                    continue
                if cost is None:
                    failed[bucket] = failed.get(bucket, 0) + 1
                else:
                    grouped.setdefault(bucket, []).append(cost)
            for bucket in spec.buckets:
                costs = grouped.get(bucket, [])
                if not costs and not failed.get(bucket):
                    continue  # empty length group
                mean, std = _mean_std(costs)
                result.fig6_rows.append(
                    {
                        **coords,
                        "bucket": _bucket_label(bucket),
                        "bucket_low": bucket[0],
                        "mean_cost": mean,
                        "std_cost": std,
                        "n_traces": len(costs),
                        "n_failures": failed.get(bucket, 0),
                    }
                )


def _run_selfchecks(runner: _Runner, result: SweepResult) -> None:
    spec = runner.spec
    rows = result.selfcheck_rows

    # Dominance: the lower-bound series must sit at or below the stochastic
    # series generated from the very same logs (matching mode/t_p/p_f).
    worst = None
    comparable = 0
    by_key = {}
    for row in result.fig5_rows:
        by_key[(row["mode"], row["series"], row["p_f"], row["t_p"])] = row["mean_cost"]
    for (mode, series, pf, tp), lb_mean in list(by_key.items()):
        if series != ProfileKind.LOWER_BOUND.value:
            continue
        st_mean = by_key.get((mode, "stochastic", pf, tp))
        if st_mean is None or math.isnan(st_mean) or math.isnan(lb_mean):
            continue
        comparable += 1
        gap = lb_mean - st_mean
        if worst is None or gap > worst:
            worst = gap
    if comparable:
        ok = worst <= 1e-12
        rows.append(
            {
                "check": "dominance_lower_bound",
                "status": "PASS" if ok else "FAIL",
                "detail": f"max(lower_bound - stochastic) = {format_number(worst)} over {comparable} points",
            }
        )

    # Deterministic equivalence: a fully uncertain log whose original
    # activities keep probability 1 must cost exactly what the plain log
    # costs under classic alignment.
    try:
        config = PerturbConfig(2, 1.0, 1.0, PerturbMode.NONE, spec.mode_fraction, spec.seed)
        lifted = generate_experiment_log(runner.base_log, config)
        stochastic_run = runner.align(lifted, CostProfile.stochastic())
        deterministic_run = runner.align(runner.base_log, CostProfile.deterministic())
        diff = max(
            (abs(a - b) for a, b in zip(stochastic_run.costs, deterministic_run.costs)),
            default=0.0,
        )
        same_count = len(stochastic_run.costs) == len(deterministic_run.costs)
        ok = same_count and diff == 0.0
        rows.append(
            {
                "check": "deterministic_equivalence_pf1",
                "status": "PASS" if ok else "FAIL",
                "detail": f"max per-trace |stochastic - deterministic| = {format_number(diff)}",
            }
        )
    except StoconError as e:
        rows.append(
            {"check": "deterministic_equivalence_pf1", "status": "FAIL", "detail": str(e)}
        )
