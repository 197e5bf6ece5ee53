"""Reproducible experiment harness.

A run is fully determined by its configuration: repetition r uses seed
``base_seed + r``, starting points are standard normal with step size 1,
and every log file carries the configuration and the problem descriptor in
its header, so the problem can be rebuilt bit-for-bit from the log alone.

Trajectories are logged as CSV (default) or JSON lines with the columns
run, seed, evaluations, quality, gap, wall_ms.  ``quality`` is the best
fitness so far in single-objective mode and the dominated hypervolume in
multi-objective mode; ``gap`` is the hypervolume gap clamped at zero.
Wall-clock times are only filled in when timing is requested, keeping the
default output byte-identical across repeated invocations.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from . import metrics, moea, problems, strategies

SINGLE_ALGORITHMS = ("lmma", "elitist-lmma")
MULTI_ALGORITHMS = ("mo-lmma", "mo-fullrank")
CSV_COLUMNS = ("run", "seed", "evaluations", "quality", "gap", "wall_ms")
OUT_DIR_ENV = "LMMAES_OUT_DIR"


class UsageError(ValueError):
    """Invalid experiment configuration or command-line usage."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an experiment.

    ``budget`` is an absolute evaluation count; ``budget_per_mu_n`` is the
    normalized form (multiplied by mu and the dimension in multi mode, by
    the dimension alone in single mode).  Exactly one of the two must be
    set.  ``log_every`` defaults to one record per n evaluations in single
    mode and one per generation in multi mode.
    """

    mode: str
    algorithm: str
    problem: str | int
    dimensions: tuple[int, ...]
    mu: int = 20
    budget: int | None = None
    budget_per_mu_n: float | None = None
    target: float | None = None
    repetitions: int = 1
    seed: int = 0
    condition: float = 1e3
    log_every: int | None = None
    scheme: str = "plus-plus"

    def __post_init__(self) -> None:
        object.__setattr__(self, "dimensions", tuple(int(n) for n in self.dimensions))
        if self.mode not in ("single", "multi"):
            raise UsageError(f"mode must be 'single' or 'multi', got {self.mode!r}")
        if self.mode == "single":
            if self.algorithm not in SINGLE_ALGORITHMS:
                raise UsageError(
                    f"algorithm {self.algorithm!r} is not a single-objective "
                    f"algorithm (choose from {SINGLE_ALGORITHMS})"
                )
            try:
                object.__setattr__(
                    self, "problem", problems.FunctionKind(str(self.problem).lower()).value
                )
            except ValueError as exc:
                raise UsageError(f"unknown test function {self.problem!r}") from exc
        else:
            if self.algorithm not in MULTI_ALGORITHMS:
                raise UsageError(
                    f"algorithm {self.algorithm!r} is not a multi-objective "
                    f"algorithm (choose from {MULTI_ALGORITHMS})"
                )
            try:
                pid = int(self.problem)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"problem id must be an integer, got {self.problem!r}") from exc
            if pid not in problems.SUITE_TABLE:
                raise UsageError(f"problem id must be in 1..9, got {pid}")
            object.__setattr__(self, "problem", pid)
            if self.mu < 2:
                raise UsageError("mu must be at least 2 in multi mode")
        if not self.dimensions:
            raise UsageError("at least one dimension is required")
        if any(n < 2 for n in self.dimensions):
            raise UsageError("all dimensions must be at least 2")
        if (self.budget is None) == (self.budget_per_mu_n is None):
            raise UsageError("set exactly one of budget and budget_per_mu_n")
        if self.budget is not None and self.budget < 1:
            raise UsageError("budget must be at least 1")
        if self.budget_per_mu_n is not None and self.budget_per_mu_n <= 0:
            raise UsageError("budget_per_mu_n must be positive")
        if self.repetitions < 1:
            raise UsageError("repetitions must be at least 1")
        if self.condition < 1.0:
            raise UsageError("condition must be at least 1")
        if self.target is not None and not self.target > 0.0:
            raise UsageError("target must be positive")
        if self.log_every is not None and self.log_every < 1:
            raise UsageError("log_every must be at least 1")
        try:
            moea.SelectionScheme(self.scheme)
        except ValueError as exc:
            raise UsageError(f"unknown selection scheme {self.scheme!r}") from exc

    def budget_for(self, n: int) -> int:
        if self.budget is not None:
            return self.budget
        per_unit = self.mu * n if self.mode == "multi" else n
        return int(math.ceil(self.budget_per_mu_n * per_unit))

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "algorithm": self.algorithm,
            "problem": self.problem,
            "dimensions": list(self.dimensions),
            "mu": self.mu,
            "budget": self.budget,
            "budget_per_mu_n": self.budget_per_mu_n,
            "target": self.target,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "condition": self.condition,
            "log_every": self.log_every,
            "scheme": self.scheme,
        }


@dataclass(frozen=True)
class RunRecord:
    run: int
    seed: int
    evaluations: int
    quality: float
    gap: float | None
    wall_ms: float | None


@dataclass
class RunStream:
    """All records of one repetition, plus how the run ended."""

    dimension: int
    run: int
    seed: int
    records: list[RunRecord] = field(default_factory=list)
    status: str = "budget"
    wall_seconds: float = 0.0

    @property
    def final(self) -> RunRecord:
        return self.records[-1]


def build_problem(config: ExperimentConfig, n: int):
    if config.mode == "single":
        return problems.SingleObjectiveProblem(problems.FunctionKind(config.problem), n)
    return problems.make_biobjective(
        int(config.problem), n, condition=config.condition, seed=config.seed
    )


def problem_descriptor(config: ExperimentConfig, n: int, problem=None) -> dict:
    """Header descriptor: enough to rebuild the problem and the run setup."""
    if problem is None:
        problem = build_problem(config, n)
    if config.mode == "single":
        descriptor = {"kind": config.problem, "dimension": n}
    else:
        descriptor = problem.descriptor()
        descriptor["mu"] = config.mu
        descriptor["scheme"] = config.scheme
    descriptor["x0"] = "standard-normal"
    descriptor["sigma0"] = 1.0
    return descriptor


def _run_single(
    config: ExperimentConfig,
    problem,
    n: int,
    rep: int,
    timing: bool,
    emit: Callable[[RunRecord], None] | None,
) -> RunStream:
    seed = config.seed + rep
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(n)
    budget = config.budget_for(n)
    cadence = config.log_every if config.log_every is not None else n
    stream = RunStream(dimension=n, run=rep, seed=seed)
    start = time.perf_counter()

    def push(evaluations: int, best: float) -> None:
        wall = (time.perf_counter() - start) * 1000.0 if timing else None
        record = RunRecord(rep, seed, evaluations, best, None, wall)
        stream.records.append(record)
        if emit is not None:
            emit(record)

    if config.algorithm == "elitist-lmma":
        es = strategies.ElitistLmmaEs(x0, 1.0)
        es.evaluate_parent(problem)

        def advance() -> float:
            es.step(problem, rng)
            return es.fitness

        best = es.fitness
    else:
        es = strategies.LmmaEs(x0, 1.0)

        def advance() -> float:
            es.run_generation(problem, rng)
            return es.best_fitness

        best = es.best_fitness
    next_tick = cadence
    while True:
        if config.target is not None and best <= config.target:
            stream.status = "target"
            break
        if es.evaluations >= budget:
            stream.status = "budget"
            break
        if es.stagnated:
            stream.status = "stagnation"
            break
        best = advance()
        if es.evaluations >= next_tick:
            push(es.evaluations, best)
            while next_tick <= es.evaluations:
                next_tick += cadence
    if not stream.records or stream.records[-1].evaluations < es.evaluations:
        push(es.evaluations, best)
    stream.wall_seconds = time.perf_counter() - start
    return stream


def _run_multi(
    config: ExperimentConfig,
    problem,
    n: int,
    rep: int,
    timing: bool,
    emit: Callable[[RunRecord], None] | None,
) -> RunStream:
    seed = config.seed + rep
    rng = np.random.default_rng(seed)
    engine_config = moea.EngineConfig(
        mu=config.mu,
        scheme=moea.SelectionScheme(config.scheme),
        reference_point=problem.reference_point,
        strategy=(
            moea.StrategyKind.LOW_RANK
            if config.algorithm == "mo-lmma"
            else moea.StrategyKind.FULL_RANK
        ),
    )
    budget = config.budget_for(n)
    cadence = config.log_every if config.log_every is not None else 1
    per_generation = config.mu if engine_config.scheme is moea.SelectionScheme.PLUS_PLUS else 1
    stream = RunStream(dimension=n, run=rep, seed=seed)
    start = time.perf_counter()

    def measure(population) -> tuple[float, float]:
        objectives = [ind.objectives for ind in population]
        hv = moea.hypervolume_2d(objectives, engine_config.reference_point)
        gap = max(
            0.0,
            metrics.hypervolume_gap(objectives, config.mu, engine_config.reference_point),
        )
        return hv, gap

    def push(evaluations: int, hv: float, gap: float) -> None:
        wall = (time.perf_counter() - start) * 1000.0 if timing else None
        record = RunRecord(rep, seed, evaluations, hv, gap, wall)
        stream.records.append(record)
        if emit is not None:
            emit(record)

    population = moea.init_population(problem, engine_config, rng)
    evaluations = config.mu
    hv, gap = measure(population)
    push(evaluations, hv, gap)
    generation = 0
    while True:
        if config.target is not None and gap <= config.target:
            stream.status = "target"
            break
        if evaluations >= budget:
            stream.status = "budget"
            break
        population = moea.engine_generation(population, engine_config, problem, rng)
        generation += 1
        evaluations += per_generation
        hv, gap = measure(population)
        if generation % cadence == 0:
            push(evaluations, hv, gap)
    if stream.records[-1].evaluations < evaluations:
        push(evaluations, hv, gap)
    stream.wall_seconds = time.perf_counter() - start
    return stream


def run_experiment(
    config: ExperimentConfig,
    timing: bool = False,
    record_hook: Callable[[int, RunRecord], None] | None = None,
) -> dict[int, list[RunStream]]:
    """Run all repetitions over all dimensions.

    Returns streams keyed by dimension.  ``record_hook(dimension, record)``
    is called as records are produced so callers can flush incrementally.
    """
    results: dict[int, list[RunStream]] = {}
    for n in config.dimensions:
        problem = build_problem(config, n)
        emit = (lambda rec, _n=n: record_hook(_n, rec)) if record_hook else None
        runner = _run_single if config.mode == "single" else _run_multi
        results[n] = [
            runner(config, problem, n, rep, timing, emit)
            for rep in range(config.repetitions)
        ]
    return results


# ---------------------------------------------------------------------------
# log writing / reading
# ---------------------------------------------------------------------------

def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RecordWriter:
    """Streams records to CSV or JSON lines with a reproducible header."""

    def __init__(self, handle: TextIO, fmt: str, config_dict: dict, descriptor: dict):
        if fmt not in ("csv", "jsonl"):
            raise UsageError(f"unknown output format {fmt!r}")
        self.handle = handle
        self.fmt = fmt
        if fmt == "csv":
            handle.write("# config: " + json.dumps(config_dict, sort_keys=True) + "\n")
            handle.write("# problem: " + json.dumps(descriptor, sort_keys=True) + "\n")
            self._csv = csv.writer(handle, lineterminator="\n")
            self._csv.writerow(CSV_COLUMNS)
        else:
            handle.write(json.dumps({"config": config_dict}, sort_keys=True) + "\n")
            handle.write(json.dumps({"problem": descriptor}, sort_keys=True) + "\n")

    def write(self, record: RunRecord) -> None:
        if self.fmt == "csv":
            self._csv.writerow(
                [
                    record.run,
                    record.seed,
                    record.evaluations,
                    _format_cell(record.quality),
                    _format_cell(record.gap),
                    _format_cell(record.wall_ms),
                ]
            )
        else:
            payload = {
                "run": record.run,
                "seed": record.seed,
                "evaluations": record.evaluations,
                "quality": record.quality,
                "gap": record.gap,
                "wall_ms": record.wall_ms,
            }
            self.handle.write(json.dumps(payload, sort_keys=True) + "\n")


@dataclass
class LoadedLog:
    config: dict | None
    problem: dict | None
    records: list[dict]


def _parse_cell(text: str):
    if text == "":
        return None
    return float(text)


def read_log(handle_or_text) -> LoadedLog:
    """Parse a trajectory log written by ``RecordWriter`` (both formats)."""
    if isinstance(handle_or_text, str):
        handle = io.StringIO(handle_or_text)
    else:
        handle = handle_or_text
    config = None
    problem = None
    records: list[dict] = []
    header: list[str] | None = None
    for line in handle:
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("# config:"):
            config = json.loads(line[len("# config:"):])
            continue
        if line.startswith("# problem:"):
            problem = json.loads(line[len("# problem:"):])
            continue
        if line.startswith("{"):
            payload = json.loads(line)
            if "config" in payload and "run" not in payload:
                config = payload["config"]
            elif "problem" in payload and "run" not in payload:
                problem = payload["problem"]
            else:
                records.append(payload)
            continue
        cells = next(csv.reader([line]))
        if header is None:
            header = cells
            if cells != list(CSV_COLUMNS):
                raise UsageError(f"unexpected CSV header {cells!r}")
            continue
        records.append(
            {
                "run": int(cells[0]),
                "seed": int(cells[1]),
                "evaluations": int(cells[2]),
                "quality": _parse_cell(cells[3]),
                "gap": _parse_cell(cells[4]),
                "wall_ms": _parse_cell(cells[5]),
            }
        )
    return LoadedLog(config=config, problem=problem, records=records)


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

def summarize(records: Sequence[dict], trapped_threshold: float | None = None) -> list[dict]:
    """Median trajectory across runs.

    Records are grouped by run, optionally filtered by the trapped-run rule
    (final quality above the threshold drops the whole run), then reduced
    to the across-run median of quality (and gap, where present) at every
    evaluation-grid point still covered by at least one run.
    """
    if not records:
        raise UsageError("no records to summarize")
    runs: dict[int, list[dict]] = {}
    for record in records:
        runs.setdefault(int(record["run"]), []).append(record)
    for rows in runs.values():
        rows.sort(key=lambda r: r["evaluations"])
    if trapped_threshold is not None:
        runs = {
            run: rows
            for run, rows in runs.items()
            if rows[-1]["quality"] is not None and rows[-1]["quality"] <= trapped_threshold
        }
        if not runs:
            raise UsageError("all runs are flagged as trapped; nothing to summarize")
    grid = sorted({row["evaluations"] for rows in runs.values() for row in rows})
    by_run = {
        run: {row["evaluations"]: row for row in rows} for run, rows in runs.items()
    }
    summary = []
    for evaluations in grid:
        hits = [by_run[run][evaluations] for run in sorted(by_run) if evaluations in by_run[run]]
        qualities = [row["quality"] for row in hits]
        gaps = [row["gap"] for row in hits if row["gap"] is not None]
        summary.append(
            {
                "evaluations": evaluations,
                "quality": float(np.median(qualities)),
                "gap": float(np.median(gaps)) if gaps else None,
                "runs": len(hits),
            }
        )
    return summary


def write_summary(handle: TextIO, summary: Sequence[dict], problem: dict | None = None) -> None:
    if problem is not None:
        handle.write("# problem: " + json.dumps(problem, sort_keys=True) + "\n")
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(("evaluations", "quality", "gap", "runs"))
    for row in summary:
        writer.writerow(
            [
                row["evaluations"],
                _format_cell(row["quality"]),
                _format_cell(row["gap"]),
                row["runs"],
            ]
        )
