"""Command-line frontend.

Subcommands: align, perturb, sweep, oracle, plot, import-xes. Exit codes:
0 full success, 2 partial failures (or failed self-checks/mismatches),
1 fatal error. STOCON_THREADS sets the per-trace parallelism (0 = auto).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .align import (
    CostProfile,
    ProfileKind,
    align_log,
    brute_force_alignment,
)
from .errors import StoconError
from .logs import import_xes, parse_log, serialize_log
from .perturb import PerturbConfig, PerturbMode, generate_experiment_log_detailed
from .petri import Marking, SystemNet, import_pnml, parse_net
from .product import build_sync_product
from .sweep import SweepSpec, format_number, run_sweep, write_csv
from .svgplot import render_line_chart
from .tracenet import build_stochastic_trace_net

PROFILE_NAMES = {kind.value: kind for kind in ProfileKind}

ALIGN_COLUMNS = (
    "case_id", "profile", "total_cost", "n_moves", "n_sync", "n_log_moves",
    "n_model_moves", "explored_nodes", "wall_time_ms",
)


def _load_net(path: str, final_marking_text: str | None) -> SystemNet:
    data = Path(path).read_bytes()
    if path.endswith(".pnml"):
        final = None
        if final_marking_text is not None:
            final = Marking(json.loads(final_marking_text))
        return import_pnml(data, final)
    return parse_net(data)


def _load_log(path: str):
    return parse_log(Path(path).read_bytes())


def _profile_from_args(args) -> CostProfile:
    return CostProfile(PROFILE_NAMES[args.profile], tau_model_move_cost=args.tau_cost)


def cmd_align(args) -> int:
    net = _load_net(args.net, args.final_marking)
    log = _load_log(args.log)
    profile = _profile_from_args(args)
    result = align_log(net, log, profile, heuristic=args.heuristic, node_cap=args.node_cap)

    rows = []
    for r in result.results:
        if r.alignment is None:
            continue
        a = r.alignment
        rows.append(
            [
                r.case_id, args.profile, format_number(a.total_cost), len(a.moves),
                a.n_sync, a.n_log_moves, a.n_model_moves, a.explored_nodes,
                format_number(round(r.wall_time_ms, 3)),
            ]
        )
    with open(args.out, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(ALIGN_COLUMNS)
        writer.writerows(rows)

    if args.moves_out:
        with open(args.moves_out, "w", encoding="utf-8") as handle:
            for r in result.results:
                if r.alignment is None:
                    continue
                handle.write(f"# case {r.case_id}\n")
                handle.write(r.alignment.dump() + "\n")

    for case_id, error in result.failures:
        print(f"align failed for case {case_id}: {error}", file=sys.stderr)
    print(f"aligned {len(rows)}/{len(log.traces)} trace(s) -> {args.out}")
    return 2 if result.failures else 0


def cmd_perturb(args) -> int:
    log = _load_log(args.log)
    if not log.is_deterministic:
        raise StoconError("perturb requires a deterministic input log")
    config = PerturbConfig(
        n_parallel=args.nt,
        original_prob=args.pf,
        uncertain_portion=args.tp,
        mode=PerturbMode(args.mode),
        mode_fraction=args.fraction,
        seed=args.seed,
        equal_split=args.equal_split,
    )
    perturbed, provenance = generate_experiment_log_detailed(log, config)
    Path(args.out).write_bytes(serialize_log(perturbed))
    sidecar = {
        "config": {
            "n_parallel": config.n_parallel,
            "original_prob": config.original_prob,
            "uncertain_portion": config.uncertain_portion,
            "mode": config.mode.value,
            "mode_fraction": config.mode_fraction,
            "seed": config.seed,
            "equal_split": config.equal_split,
        },
        "traces": provenance,
    }
    sidecar_path = args.out + ".provenance.json"
    Path(sidecar_path).write_text(
        json.dumps(sidecar, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"wrote {args.out} and {sidecar_path}")
    return 0


def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def cmd_sweep(args) -> int:
    net = _load_net(args.net, args.final_marking)
    log = _load_log(args.log)
    spec_kwargs = dict(
        tp_step=args.tp_step,
        modes=tuple(PerturbMode(m.strip()) for m in args.modes.split(",") if m.strip()),
        profiles=tuple(PROFILE_NAMES[p.strip()] for p in args.profiles.split(",") if p.strip()),
        seed=args.seed,
        repetitions=args.repetitions,
        mode_fraction=args.fraction,
    )
    if args.pf:
        spec_kwargs["pf_values"] = _csv_floats(args.pf)
    if args.pf_grid:
        spec_kwargs["pf_grid"] = _csv_floats(args.pf_grid)
    if args.nt:
        spec_kwargs["nt_values"] = _csv_ints(args.nt)
    spec = SweepSpec(**spec_kwargs)

    result = run_sweep(net, log, spec, node_cap=args.node_cap)
    result.write(args.out_dir)
    for row in result.selfcheck_rows:
        print(f"selfcheck {row['check']}: {row['status']} ({row['detail']})")
    print(
        f"wrote fig4/fig5/fig6/errors/selfcheck CSVs to {args.out_dir} "
        f"({len(result.error_rows)} recorded failure(s))"
    )
    if not result.selfchecks_passed or result.error_rows:
        return 2
    return 0


def cmd_oracle(args) -> int:
    net = _load_net(args.net, args.final_marking)
    log = _load_log(args.log)
    profile = _profile_from_args(args)
    mismatches = 0
    errors = 0
    for trace in log.traces:
        try:
            product = build_sync_product(net, build_stochastic_trace_net(trace))
            from .align import optimal_alignment

            search = optimal_alignment(product, profile, node_cap=args.node_cap)
            brute = brute_force_alignment(net, trace, profile, cap=args.cap)
        except StoconError as e:
            errors += 1
            print(f"case {trace.case_id}: ERROR {e}")
            continue
        diff = abs(search.total_cost - brute.total_cost)
        status = "OK" if diff <= 1e-9 else "MISMATCH"
        if status == "MISMATCH":
            mismatches += 1
        print(
            f"case {trace.case_id}: search={format_number(search.total_cost)} "
            f"brute={format_number(brute.total_cost)} |diff|={format_number(diff)} {status}"
        )
    total = len(log.traces)
    verdict = "PASS" if mismatches == 0 and errors == 0 else "FAIL"
    print(f"{verdict}: {total - mismatches - errors}/{total} trace(s) agree at 1e-9")
    return 0 if verdict == "PASS" else 2


_PLOT_X_CANDIDATES = ("t_p", "p_f", "bucket_low", "x")
_PLOT_COORD_CANDIDATES = ("mode", "series", "profile", "n_t", "p_f", "bucket")


def cmd_plot(args) -> int:
    with open(args.csv, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    if not rows:
        raise StoconError(f"{args.csv} has no data rows")
    header = list(rows[0].keys())
    x_col = args.x or next((c for c in _PLOT_X_CANDIDATES if c in header), None)
    if x_col is None:
        raise StoconError("cannot infer the x column; pass --x")
    y_col = args.y
    if y_col not in header:
        raise StoconError(f"no column {y_col!r} in {args.csv}")
    if args.series:
        series_cols = [c.strip() for c in args.series.split(",") if c.strip()]
    else:
        series_cols = [c for c in _PLOT_COORD_CANDIDATES if c in header and c != x_col]

    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        if not row.get(x_col) or not row.get(y_col):
            continue
        key = ",".join(f"{c}={row[c]}" for c in series_cols if row.get(c)) or y_col
        series.setdefault(key, []).append((float(row[x_col]), float(row[y_col])))
    svg = render_line_chart(
        series, title=Path(args.csv).stem, x_label=x_col, y_label=y_col
    )
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out} ({len(series)} series)")
    return 0


def cmd_import_xes(args) -> int:
    log = import_xes(Path(args.xes).read_bytes())
    Path(args.out).write_bytes(serialize_log(log))
    print(f"imported {len(log.traces)} trace(s) -> {args.out}")
    return 0


def _add_profile_flags(parser) -> None:
    parser.add_argument(
        "--profile", choices=sorted(PROFILE_NAMES), default="stochastic",
        help="cost profile (default: stochastic)",
    )
    parser.add_argument(
        "--tau-cost", type=float, default=0.0,
        help="cost of silent model moves (default: 0)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stocon",
        description="Alignment-based conformance checking for stochastically known logs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="align a log against a net, write per-trace CSV")
    p.add_argument("--net", required=True)
    p.add_argument("--log", required=True)
    _add_profile_flags(p)
    p.add_argument("--heuristic", action="store_true", help="use A* instead of plain Dijkstra")
    p.add_argument("--node-cap", type=int, default=1_000_000)
    p.add_argument("--final-marking", default=None, help='JSON marking for PNML nets, e.g. {"end":1}')
    p.add_argument("--moves-out", default=None, help="also dump per-move detail (TSV)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("perturb", help="turn a deterministic log into a stochastic one")
    p.add_argument("--log", required=True)
    p.add_argument("--nt", type=int, required=True, help="distribution size for uncertain events")
    p.add_argument("--pf", type=float, required=True, help="probability kept by the original activity")
    p.add_argument("--tp", type=float, required=True, help="fraction of events made uncertain")
    p.add_argument("--mode", choices=[m.value for m in PerturbMode], default="none")
    p.add_argument("--fraction", type=float, default=0.3, help="pre-modification fraction")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--equal-split", action="store_true", help="split leftover probability evenly")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("sweep", help="run the benchmark grid, write figure-ready CSVs")
    p.add_argument("--net", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--pf", default=None, help="comma list of probability series (default 0.55,0.75,0.95)")
    p.add_argument("--pf-grid", default=None, help="comma list for the probability axis (default 0.50..0.95)")
    p.add_argument("--tp-step", type=float, default=0.05)
    p.add_argument("--nt", default=None, help="comma list of distribution sizes (default 2,3,4)")
    p.add_argument("--modes", default="none")
    p.add_argument("--profiles", default="stochastic,lower-bound")
    p.add_argument("--fraction", type=float, default=0.3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--node-cap", type=int, default=1_000_000)
    p.add_argument("--final-marking", default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="check the search against the brute-force oracle")
    p.add_argument("--net", required=True)
    p.add_argument("--log", required=True)
    _add_profile_flags(p)
    p.add_argument("--cap", type=int, default=256, help="max realizations per trace")
    p.add_argument("--node-cap", type=int, default=1_000_000)
    p.add_argument("--final-marking", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("plot", help="render a sweep CSV as an SVG line chart")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--x", default=None)
    p.add_argument("--y", default="mean_cost")
    p.add_argument("--series", default=None, help="comma list of grouping columns")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("import-xes", help="convert an XES log to the stochastic log format")
    p.add_argument("--xes", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import_xes)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StoconError, OSError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
