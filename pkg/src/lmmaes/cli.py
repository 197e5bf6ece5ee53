"""Command-line experiment driver.

Subcommands: ``run`` executes seeded trials and writes trajectory logs,
``summarize`` reduces logs to median trajectories, ``list-problems``
prints the available test functions and suite entries.

Exit status: 0 on success, 2 on usage errors, 3 when a run aborts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import experiment, problems
from .experiment import ExperimentConfig, UsageError
from .strategies import NonFiniteObjectiveError

_CONFIG_KEYS = (
    "mode",
    "algorithm",
    "problem",
    "dimensions",
    "mu",
    "budget",
    "budget_per_mu_n",
    "target",
    "repetitions",
    "seed",
    "condition",
    "log_every",
    "scheme",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmmaes",
        description="Run and summarize evolution-strategy benchmark experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a seeded experiment and log trajectories")
    run.add_argument("--config", help="JSON file with configuration defaults")
    run.add_argument("--mode", choices=("single", "multi"))
    run.add_argument(
        "--algo",
        choices=experiment.SINGLE_ALGORITHMS + experiment.MULTI_ALGORITHMS,
        help="optimizer to run",
    )
    run.add_argument("--problem", help="test function name (single) or suite id 1..9 (multi)")
    run.add_argument(
        "--dim",
        action="append",
        help="problem dimension; repeat or comma-separate for several",
    )
    run.add_argument("--mu", type=int, help="population size (multi mode)")
    run.add_argument("--budget", type=int, help="maximum objective evaluations")
    run.add_argument(
        "--budget-per-mu-n",
        type=float,
        help="budget as a multiple of mu*n (multi) or n (single)",
    )
    run.add_argument("--target", type=float, help="stop at this fitness (single) or gap (multi)")
    run.add_argument("--reps", type=int, help="number of repetitions (seeds)")
    run.add_argument("--seed", type=int, help="base seed; repetition r uses seed+r")
    run.add_argument("--condition", type=float, help="suite condition number")
    run.add_argument("--log-every", type=int, help="record cadence (evaluations or generations)")
    run.add_argument("--scheme", choices=("plus-plus", "steady-state"))
    run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    run.add_argument(
        "--out",
        help="output path ('-' for stdout); default: auto-named file in "
        f"$'{experiment.OUT_DIR_ENV}' or the working directory",
    )
    run.add_argument(
        "--timing",
        action="store_true",
        help="fill the wall_ms column (output is no longer byte-reproducible)",
    )
    run.set_defaults(func=_cmd_run)

    summ = sub.add_parser("summarize", help="median trajectory across runs")
    summ.add_argument("inputs", nargs="+", help="trajectory logs from 'run'")
    summ.add_argument("--out", help="summary CSV path ('-' or omitted for stdout)")
    summ.add_argument(
        "--trapped-threshold",
        type=float,
        help="drop runs whose final fitness exceeds this value "
        "(defaults to 1 for Rosenbrock logs, off otherwise)",
    )
    summ.add_argument(
        "--no-trap-filter",
        action="store_true",
        help="keep all runs even on Rosenbrock",
    )
    summ.set_defaults(func=_cmd_summarize)

    lst = sub.add_parser("list-problems", help="show available problems")
    lst.set_defaults(func=_cmd_list_problems)
    return parser


def _parse_dimensions(raw: list[str] | None) -> tuple[int, ...]:
    if not raw:
        return ()
    dims: list[int] = []
    for chunk in raw:
        for piece in str(chunk).split(","):
            piece = piece.strip()
            if piece:
                dims.append(int(piece))
    return tuple(dims)


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    settings: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            loaded = json.load(handle)
        unknown = set(loaded) - set(_CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    overrides = {
        "mode": args.mode,
        "algorithm": args.algo,
        "problem": args.problem,
        "mu": args.mu,
        "budget": args.budget,
        "budget_per_mu_n": args.budget_per_mu_n,
        "target": args.target,
        "repetitions": args.reps,
        "seed": args.seed,
        "condition": args.condition,
        "log_every": args.log_every,
        "scheme": args.scheme,
    }
    dims = _parse_dimensions(args.dim)
    if dims:
        overrides["dimensions"] = dims
    settings.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("mode", "algorithm", "problem"):
        if key not in settings:
            raise UsageError(f"missing required setting {key!r}")
    if "dimensions" not in settings:
        raise UsageError("at least one --dim is required")
    defaults = {
        "mu": 20,
        "repetitions": 1,
        "seed": 0,
        "condition": 1e3,
        "scheme": "plus-plus",
    }
    for key, value in defaults.items():
        settings.setdefault(key, value)
    return ExperimentConfig(**settings)


def _output_path(args: argparse.Namespace, config: ExperimentConfig, n: int) -> Path | None:
    """Resolve the per-dimension output path; None means stdout."""
    suffix = ".csv" if args.format == "csv" else ".jsonl"
    many = len(config.dimensions) > 1
    if args.out in (None, ""):
        out_dir = Path(os.environ.get(experiment.OUT_DIR_ENV, "."))
        name = f"run-{config.algorithm}-{config.problem}-n{n}{suffix}"
        return out_dir / name
    if args.out == "-":
        if many:
            raise UsageError("stdout output supports a single dimension only")
        return None
    path = Path(args.out)
    if many:
        stem = path.stem if path.suffix else path.name
        ext = path.suffix or suffix
        return path.with_name(f"{stem}-n{n}{ext}")
    return path


def _cmd_run(args: argparse.Namespace) -> int:
    config = _build_config(args)
    writers: dict[int, experiment.RecordWriter] = {}
    handles: list = []
    try:
        for n in config.dimensions:
            problem = experiment.build_problem(config, n)
            descriptor = experiment.problem_descriptor(config, n, problem)
            path = _output_path(args, config, n)
            if path is None:
                handle = sys.stdout
            else:
                path.parent.mkdir(parents=True, exist_ok=True)
                handle = open(path, "w", encoding="utf-8", newline="")
                handles.append(handle)
            writers[n] = experiment.RecordWriter(handle, args.format, config.as_dict(), descriptor)
            if path is not None:
                print(f"writing n={n} trajectories to {path}", file=sys.stderr)

        def hook(dimension: int, record: experiment.RunRecord) -> None:
            writers[dimension].write(record)
            writers[dimension].handle.flush()

        results = experiment.run_experiment(config, timing=args.timing, record_hook=hook)
    finally:
        for handle in handles:
            handle.close()
    for n, streams in results.items():
        for stream in streams:
            final = stream.final
            quality = final.quality
            extra = f" gap={final.gap!r}" if final.gap is not None else ""
            print(
                f"n={n} run={stream.run} seed={stream.seed} status={stream.status} "
                f"evaluations={final.evaluations} quality={quality!r}{extra} "
                f"({stream.wall_seconds:.2f}s)",
                file=sys.stderr,
            )
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    records: list[dict] = []
    problem_header: dict | None = None
    for name in args.inputs:
        with open(name, "r", encoding="utf-8") as handle:
            log = experiment.read_log(handle)
        if log.problem is not None:
            if problem_header is not None and problem_header != log.problem:
                raise UsageError("inputs describe different problems; summarize them separately")
            problem_header = log.problem
        records.extend(log.records)
    threshold = args.trapped_threshold
    if threshold is None and not args.no_trap_filter:
        if problem_header is not None and problem_header.get("kind") == "rosenbrock":
            threshold = 1.0
    if args.no_trap_filter:
        threshold = None
    summary = experiment.summarize(records, trapped_threshold=threshold)
    if args.out in (None, "", "-"):
        experiment.write_summary(sys.stdout, summary, problem_header)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            experiment.write_summary(handle, summary, problem_header)
    return 0


def _cmd_list_problems(args: argparse.Namespace) -> int:
    print("single-objective functions (optimum value 0):")
    for kind in problems.FunctionKind:
        print(f"  {kind.value}")
    print()
    print("bi-objective suite (normalized, linear front from (0,1) to (1,0)):")
    print("  id  functions            aligned  shared-axes  hessian")
    for pid, row in problems.SUITE_TABLE.items():
        functions = f"{row.first} + {row.second}"
        axes = "yes" if row.shared_axes else "no"
        hessian = "same" if row.same_hessian else "different"
        print(f"  {pid:>2}  {functions:<20} {row.aligned:<8} {axes:<12} {hessian}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteObjectiveError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
