"""Command-line entry points: solve one problem, sweep a dataset, inspect traces.

Under replay mode all output is byte-stable except timing lines, which are
prefixed with ``time`` so they can be filtered out of golden comparisons.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .bench import FormatError, load_dataset, render_table, run_bench
from .config import CliConfig, ConfigError
from .driver import solve_problem
from .engine import RunTrace, StageError
from .gateway import ReplayMiss, TransportError
from .prompting import ParseError
from .runner_client import SandboxUnavailable
from .schema import ProblemInstance, SchemaError


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--gateway", choices=["live", "record", "replay"], dest="gateway_mode")
    parser.add_argument("--cassette", dest="cassette_path", help="cassette file for record/replay")
    parser.add_argument(
        "--verifier", choices=["llm", "similarity"], dest="verifier_method",
        help="consistency check strategy",
    )
    parser.add_argument("--tau", type=float, help="similarity threshold (inclusive)")
    parser.add_argument("--t-max", type=int, dest="t_max", help="correction iteration cap")
    parser.add_argument(
        "--debug-attempts", type=int, dest="debug_attempts", help="debugging attempt cap"
    )
    parser.add_argument("--solver", help="solver backend name passed to the runner")
    parser.add_argument("--parallel", type=int, help="concurrent problem evaluations")
    parser.add_argument("--repeats", type=int, help="independent runs per problem")


def _load_config(args: argparse.Namespace) -> CliConfig:
    overrides = {
        name: getattr(args, name, None)
        for name in (
            "gateway_mode",
            "cassette_path",
            "verifier_method",
            "tau",
            "t_max",
            "debug_attempts",
            "solver",
            "parallel",
            "repeats",
        )
    }
    return CliConfig.load(args.config, **overrides)


def _load_problem(path: Path) -> ProblemInstance:
    doc = json.loads(path.read_text())
    data = doc.get("data", {})
    if "data_file" in doc:
        data_path = Path(doc["data_file"])
        if not data_path.is_absolute():
            data_path = path.parent / data_path
        if not data_path.exists():
            raise FileNotFoundError(f"data file not found: {data_path}")
        data = json.loads(data_path.read_text())
    objective = doc.get("ground_truth_objective")
    return ProblemInstance(
        id=doc.get("id", path.stem),
        description=doc["description"],
        data=data,
        ground_truth_objective=None if objective is None else float(objective),
        ground_truth_solution=doc.get("ground_truth_solution"),
    )


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args)
        problem = _load_problem(Path(args.problem))
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    context = config.build_context(with_executor=not args.no_execute)
    try:
        outcome = solve_problem(problem, context, config.build_engine_config())
    except (StageError, SandboxUnavailable, TransportError, ReplayMiss, SchemaError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    trace_path = Path(args.trace_out) if args.trace_out else Path(f"{problem.id}.trace.json")
    outcome.trace.write(trace_path)

    print(f"problem: {problem.id}")
    print(f"anchors: {len(outcome.structured.anchors)}")
    print(f"error set sizes: {outcome.trace.error_set_sizes}")
    print(f"corrections: {outcome.trace.corrections_total}")
    print(f"debug attempts: {outcome.debug_attempts}")
    if outcome.result is None:
        print("execution: skipped")
    else:
        print(f"status: {outcome.result.status}")
        if outcome.result.objective is not None:
            print(f"objective: {outcome.result.objective:g}")
        if outcome.result.solution:
            print(f"solution: {json.dumps(outcome.result.solution, sort_keys=True)}")
        if outcome.result.error_text:
            print(f"error text: {outcome.result.error_text.strip()[:400]}")
    print(f"trace written: {trace_path}")
    print(f"time total: {outcome.run_time:.3f}s")
    return 0


_METHOD_NAMES = {"llm": "llm", "sim": "similarity"}


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args)
        manifest = load_dataset(args.dataset)
    except (ConfigError, FormatError, IOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    methods = ["llm", "sim"] if args.method == "both" else [args.method]
    context = config.build_context()
    reports = {}
    try:
        for method in methods:
            config.verifier_method = _METHOD_NAMES[method]
            report = run_bench(
                manifest,
                config.build_engine_config(),
                parallelism=config.parallel,
                repeats=config.repeats,
                context=context,
            )
            reports[method.upper()] = report
    except (SandboxUnavailable, ReplayMiss, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(render_table(reports, manifest.name))
    if args.report_out:
        payload = {name: report.to_dict() for name, report in reports.items()}
        Path(args.report_out).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"report written: {args.report_out}")
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    try:
        trace = RunTrace.load(Path(args.trace))
    except (IOError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not trace.error_set_sizes:
        print("no iterations")
        return 0
    print(f"error set sizes: {trace.error_set_sizes}")
    print(f"corrections: {trace.corrections_total}")
    for iteration, anchor_id, event, detail in trace.anchor_events:
        suffix = f" {detail}" if detail else ""
        print(f"t={iteration} anchor={anchor_id} {event}{suffix}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "error_count"])
            for iteration, count in enumerate(trace.error_set_sizes, start=1):
                writer.writerow([iteration, count])
        print(f"csv written: {args.csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optanchor",
        description="Translate natural-language optimization problems into solver-ready programs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run the full pipeline on one problem file")
    solve.add_argument("problem", help="problem JSON file")
    solve.add_argument("--trace-out", help="trace JSON path (default: <id>.trace.json)")
    solve.add_argument(
        "--no-execute", action="store_true", help="stop after assembly; skip the sandbox"
    )
    _common_flags(solve)
    solve.set_defaults(func=cmd_solve)

    bench = sub.add_parser("bench", help="run a benchmark sweep over a JSONL dataset")
    bench.add_argument("dataset", help="dataset JSONL file")
    bench.add_argument("--method", choices=["llm", "sim", "both"], default="llm")
    bench.add_argument("--report-out", help="write the JSON report here")
    _common_flags(bench)
    bench.set_defaults(func=cmd_bench)

    trace = sub.add_parser("trace", help="inspect a run trace")
    trace.add_argument("trace", help="trace JSON file")
    trace.add_argument("--csv", help="write (iteration, error_count) rows here")
    trace.set_defaults(func=cmd_trace)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
