"""Batch command-line front end: plan, sweep, and generate from JSON inputs.

Every command reads JSON inputs, writes a deterministic report to stdout (or
--out), and exits 0 on success, 2 on input errors, and 3 when an engine
cannot handle the instance (for example the brute-force oracle's size cap).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import inter, intra, simulate
from .cost_model import GB, PriceBook, PriceError, break_even_scan_bytes, default_price_book
from .inter import DEFAULT_BANDWIDTH_BYTES_PER_S, OracleLimitError, PlanError
from .intra import DagError, load_query_dag_path
from .money import dollars_str
from .simulate import SweepError, SweepSpec, VariedPrice, price_grid
from .workload import Backend, WorkloadError, load_workload_path, workload_to_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPABILITY = 3

BANDWIDTH_ENV = "CLOUDPLAN_BANDWIDTH_GBPS"

_INPUT_ERRORS = (
    WorkloadError,
    DagError,
    PriceError,
    PlanError,
    SweepError,
    ValueError,
    KeyError,
    OSError,
    json.JSONDecodeError,
)


class _CliInputError(Exception):
    pass


def _bandwidth_bytes_per_s() -> float:
    raw = os.environ.get(BANDWIDTH_ENV)
    if raw is None:
        return DEFAULT_BANDWIDTH_BYTES_PER_S
    try:
        gbps = float(raw)
    except ValueError as exc:
        raise _CliInputError(f"bad {BANDWIDTH_ENV}: {raw!r}") from exc
    if gbps <= 0:
        raise _CliInputError(f"bad {BANDWIDTH_ENV}: {raw!r}")
    return gbps * 1e9 / 8


def _digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_prices(path) -> PriceBook:
    if path is None:
        return default_price_book()
    with open(path, "r", encoding="utf-8") as fh:
        return PriceBook.from_json(json.load(fh))


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _emit_json(doc: dict, out_path) -> None:
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out_path)


def _report_inputs(args, **paths) -> dict:
    inputs = {}
    for label, path in paths.items():
        if path is not None:
            inputs[label] = _digest(path)
    return inputs


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--prices", metavar="PATH", help="price book JSON (default: built-in list prices)")
    parser.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    parser.add_argument("--seed", type=int, default=0, help="seed for seeded commands")


def _cmd_plan_inter(args) -> int:
    workload = load_workload_path(args.workload)
    prices = _load_prices(args.prices)
    bandwidth = _bandwidth_bytes_per_s()
    solvers = {
        "greedy": inter.greedy_plan,
        "mincut": inter.optimal_plan,
        "brute": inter.brute_force_plan,
    }
    plan = solvers[args.solver](workload, prices, deadline=args.deadline, bandwidth=bandwidth)
    warnings = []
    if not plan.deadline_met:
        warnings.append("deadline exceeded by baseline")
    report = {
        "command": "plan-inter",
        "options": {
            "solver": args.solver,
            "deadline_s": args.deadline,
            "bandwidth_bytes_per_s": bandwidth,
        },
        "inputs": _report_inputs(args, workload=args.workload, prices=args.prices),
        "plan": plan.to_json(),
        "savings_total": dollars_str(plan.savings),
        "warnings": warnings,
    }
    _emit_json(report, args.out)
    if args.emit_plot_data:
        lines = [
            f"baseline {plan.baseline_runtime!r} {dollars_str(plan.baseline_cost)}",
            f"plan {plan.runtime!r} {dollars_str(plan.cost.total)}",
        ]
        Path(f"{args.emit_plot_data}.cost_runtime.dat").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def _stdin_fr_oracle():
    def ask(node_id: str) -> float:
        print(f"fr? {node_id}", file=sys.stderr, flush=True)
        line = sys.stdin.readline()
        if not line:
            raise _CliInputError(f"no fr value supplied for node {node_id!r}")
        return float(line.strip())

    return ask


def _cmd_plan_intra(args) -> int:
    dag = load_query_dag_path(args.dag)
    prices = _load_prices(args.prices)
    bandwidth = _bandwidth_bytes_per_s()
    fr_oracle = None
    if dag.fr_values is None:
        if not args.interactive:
            raise _CliInputError(
                "profile has no fr_s values; rerun with --interactive to inject them"
            )
        fr_oracle = _stdin_fr_oracle()
    result = intra.intra_plan(
        dag,
        prices,
        deadline=args.deadline,
        max_iters=args.max_iters,
        fr_oracle=fr_oracle,
        bandwidth=bandwidth,
        scan_migrated_output=not args.literal_scan_cost,
    )
    warnings = []
    if result.downstream_unmodeled:
        warnings.append("downstream runtime unmodeled")
    cut = None
    if result.cut is not None:
        cut = {
            "node": result.cut.node,
            "opportunity": dollars_str(result.cut.opportunity),
            "actual_savings": dollars_str(result.cut.actual_savings),
            "feasible": result.cut.feasible,
        }
    report = {
        "command": "plan-intra",
        "options": {
            "max_iters": args.max_iters,
            "deadline_s": args.deadline,
            "literal_scan_cost": args.literal_scan_cost,
            "bandwidth_bytes_per_s": bandwidth,
        },
        "inputs": _report_inputs(args, dag=args.dag, prices=args.prices),
        "query_id": result.query_id,
        "cut": cut,
        "plan_cost": dollars_str(result.plan_cost),
        "baseline_cost": dollars_str(result.baseline_cost),
        "search_cost": dollars_str(result.search_cost),
        "fr_evaluations": result.fr_evaluations,
        "warnings": warnings,
    }
    _emit_json(report, args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    workload = load_workload_path(args.workload)
    prices = _load_prices(args.prices)
    bandwidth = _bandwidth_bytes_per_s()
    grid = price_grid(args.from_price, args.to_price, args.steps)
    spec = SweepSpec(workload, VariedPrice(args.vary), grid, prices)
    rows = simulate.run_sweep(spec, solver=args.solver, bandwidth=bandwidth)
    _emit(simulate.sweep_rows_to_csv(rows), args.out)
    if args.emit_plot_data:
        savings = "\n".join(f"{float(r.price)!r} {r.savings_pct:.6f}" for r in rows)
        speedup = "\n".join(f"{float(r.price)!r} {r.speedup_pct:.6f}" for r in rows)
        Path(f"{args.emit_plot_data}.savings.dat").write_text(savings + "\n", encoding="utf-8")
        Path(f"{args.emit_plot_data}.speedup.dat").write_text(speedup + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_breakeven(args) -> int:
    prices = _load_prices(args.prices)
    scan_bytes = break_even_scan_bytes(args.runtime, prices)
    report = {
        "command": "breakeven",
        "inputs": _report_inputs(args, prices=args.prices),
        "runtime_s": args.runtime,
        "scan_bytes": scan_bytes,
        "scan_tb": scan_bytes / 1e12,
    }
    _emit_json(report, args.out)
    return EXIT_OK


def _cmd_gen(args) -> int:
    workload = simulate.generate_workload(
        seed=args.seed,
        n_tables=args.tables,
        n_queries=args.queries,
        cpu_bound_fraction=args.cpu_fraction,
        size_range=(int(args.size_min_gb * GB), int(args.size_max_gb * GB)),
        source_backend=Backend(args.source),
        deadline=args.deadline,
    )
    _emit_json(workload_to_json(workload), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloudplan",
        description="Plan the cheapest placement of queries across two cloud pricing models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan-inter", help="choose which tables and queries migrate")
    _add_common(p)
    p.add_argument("workload", help="workload profile JSON")
    p.add_argument("--solver", choices=["greedy", "mincut", "brute"], default="greedy")
    p.add_argument("--deadline", type=float, default=None,
                   help="workload runtime bound in seconds (overrides the file)")
    p.add_argument("--emit-plot-data", metavar="PREFIX",
                   help="also write cost-vs-runtime series to PREFIX.cost_runtime.dat")
    p.set_defaults(func=_cmd_plan_inter)

    p = sub.add_parser("plan-intra", help="find the best cut of one query plan")
    _add_common(p)
    p.add_argument("dag", help="query DAG JSON")
    p.add_argument("--max-iters", type=int, default=None,
                   help="cap on billed upstream-runtime evaluations")
    p.add_argument("--deadline", type=float, default=None, help="query runtime bound in seconds")
    p.add_argument("--interactive", action="store_true",
                   help="read missing upstream runtimes from stdin (prompts on stderr)")
    p.add_argument("--literal-scan-cost", action="store_true",
                   help="price only downstream base-table scans, not the shipped intermediate")
    p.set_defaults(func=_cmd_plan_intra)

    p = sub.add_parser("sweep", help="re-plan across a grid of hypothetical prices")
    _add_common(p)
    p.add_argument("workload", help="workload profile JSON")
    p.add_argument("--vary", choices=[v.value for v in VariedPrice], required=True)
    p.add_argument("--from", dest="from_price", required=True, help="low price in $/TB")
    p.add_argument("--to", dest="to_price", required=True, help="high price in $/TB")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--solver", choices=["greedy", "mincut"], default="greedy")
    p.add_argument("--emit-plot-data", metavar="PREFIX",
                   help="also write PREFIX.savings.dat and PREFIX.speedup.dat")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("breakeven", help="scan size where both pricing models cost the same")
    _add_common(p)
    p.add_argument("--runtime", type=float, required=True, help="query runtime in seconds")
    p.set_defaults(func=_cmd_breakeven)

    p = sub.add_parser("gen", help="emit a seeded synthetic workload profile")
    _add_common(p)
    p.add_argument("--tables", type=int, default=8)
    p.add_argument("--queries", type=int, default=20)
    p.add_argument("--cpu-fraction", type=float, default=0.3)
    p.add_argument("--size-min-gb", type=float, default=4.0)
    p.add_argument("--size-max-gb", type=float, default=64.0)
    p.add_argument("--source", choices=[b.value for b in Backend], default="PER_BYTE")
    p.add_argument("--deadline", type=float, default=None)
    p.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleLimitError as exc:
        print(f"cloudplan: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (_CliInputError, *_INPUT_ERRORS) as exc:
        print(f"cloudplan: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
