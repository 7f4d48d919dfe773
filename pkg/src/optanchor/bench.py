"""Dataset loading, the correctness judgment, and benchmark sweeps.

A solved problem counts as correct when execution reached optimality and
the objective matches the recorded ground truth within a relative
tolerance. Solution-vector comparison is available but off by default:
under multiple optima, equality of solutions is ill-posed while the
optimal objective value is not.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from .assemble import ExecutionResult
from .engine import EngineConfig, StageError
from .schema import ProblemInstance

if TYPE_CHECKING:
    from .driver import PipelineContext

log = logging.getLogger(__name__)

FAILURE_KINDS = ("exec_error", "wrong_objective", "wrong_solution", "timeout", "stage_error")
DIFFICULTY_TAGS = ("easy", "hard")


class FormatError(ValueError):
    """A dataset file is malformed."""


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    problems: tuple[ProblemInstance, ...]
    difficulty_tag: str = "easy"

    def __post_init__(self) -> None:
        if self.difficulty_tag not in DIFFICULTY_TAGS:
            raise ValueError(f"difficulty {self.difficulty_tag!r} not one of {DIFFICULTY_TAGS}")
        ids = [p.id for p in self.problems]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise FormatError(f"duplicate problem ids: {dupes}")


@dataclass(frozen=True)
class EvalRecord:
    problem_id: str
    correct: bool
    failure_kind: str | None = None
    corrections: int = 0
    debug_attempts: int = 0
    run_time: float = 0.0

    def __post_init__(self) -> None:
        if self.correct and self.failure_kind is not None:
            raise ValueError("correct records cannot carry a failure kind")
        if self.failure_kind is not None and self.failure_kind not in FAILURE_KINDS:
            raise ValueError(f"failure kind {self.failure_kind!r} not one of {FAILURE_KINDS}")


@dataclass(frozen=True)
class BenchReport:
    accuracy: float
    run_time_mean: float
    corrections_mean: float
    corrections_std: float
    debug_mean: float
    debug_std: float
    per_problem: tuple[EvalRecord, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "run_time_mean": self.run_time_mean,
            "corrections_mean": self.corrections_mean,
            "corrections_std": self.corrections_std,
            "debug_mean": self.debug_mean,
            "debug_std": self.debug_std,
            "per_problem": [
                {
                    "problem_id": r.problem_id,
                    "correct": r.correct,
                    "failure_kind": r.failure_kind,
                    "corrections": r.corrections,
                    "debug_attempts": r.debug_attempts,
                    "run_time": r.run_time,
                }
                for r in self.per_problem
            ],
        }


def load_dataset(
    path: str | Path, *, name: str | None = None, difficulty: str = "easy"
) -> DatasetManifest:
    """Load a JSON-lines dataset, one problem object per line.

    Entries without a description are skipped with a warning; duplicate ids
    and empty files are format errors.
    """
    path = Path(path)
    if not path.exists():
        raise IOError(f"dataset file not found: {path}")
    problems: list[ProblemInstance] = []
    seen: set[str] = set()
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"dataset file is empty: {path}")
    for lineno, line in enumerate(lines, start=1):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict) or "id" not in doc:
            raise FormatError(f"{path}:{lineno}: entry must be an object with an 'id'")
        if not doc.get("description"):
            log.warning("%s:%d: skipping entry %r without a description", path, lineno, doc["id"])
            continue
        if doc["id"] in seen:
            raise FormatError(f"{path}:{lineno}: duplicate id {doc['id']!r}")
        seen.add(doc["id"])
        objective = doc.get("ground_truth_objective")
        problems.append(
            ProblemInstance(
                id=doc["id"],
                description=doc["description"],
                data=doc.get("data", {}),
                ground_truth_objective=None if objective is None else float(objective),
                ground_truth_solution=doc.get("ground_truth_solution"),
            )
        )
    return DatasetManifest(
        name=name or path.stem, problems=tuple(problems), difficulty_tag=difficulty
    )


def _values_match(actual: Any, expected: Any, rel_tol: float) -> bool:
    try:
        a = np.asarray(actual, dtype=float)
        b = np.asarray(expected, dtype=float)
    except (TypeError, ValueError):
        return False
    if a.shape != b.shape:
        return False
    return bool(np.all(np.abs(a - b) <= rel_tol * np.maximum(1.0, np.abs(b))))


def judge(
    result: ExecutionResult,
    problem: ProblemInstance,
    rel_tol: float = 1e-4,
    *,
    check_solution: bool = False,
) -> tuple[bool, str | None]:
    """Classify an execution outcome against the problem's ground truth.

    Returns (correct, failure_kind); failure_kind names the first failed
    clause and is None when correct.
    """
    if problem.ground_truth_objective is None:
        raise ValueError(f"problem {problem.id} has no ground-truth objective")
    if result.status == "timeout":
        return False, "timeout"
    if result.status in ("runtime_error", "contract_violation"):
        return False, "exec_error"
    if result.status in ("infeasible", "unbounded"):
        return False, "wrong_objective"
    truth = problem.ground_truth_objective
    if abs(result.objective - truth) > rel_tol * max(1.0, abs(truth)):
        return False, "wrong_objective"
    if check_solution and problem.ground_truth_solution is not None:
        solution = result.solution or {}
        for symbol, expected in problem.ground_truth_solution.items():
            if symbol not in solution or not _values_match(solution[symbol], expected, rel_tol):
                return False, "wrong_solution"
    return True, None


def _population_std(values: list[float]) -> float:
    if not values:
        return 0.0
    return float(np.std(np.asarray(values, dtype=float)))


def aggregate(records: list[EvalRecord]) -> BenchReport:
    """Order-insensitive aggregation of per-run records."""
    ordered = tuple(sorted(records, key=lambda r: r.problem_id))
    n = len(ordered)
    corrections = [float(r.corrections) for r in ordered]
    debugs = [float(r.debug_attempts) for r in ordered]
    times = [r.run_time for r in ordered]
    return BenchReport(
        accuracy=(sum(1 for r in ordered if r.correct) / n) if n else 0.0,
        run_time_mean=(sum(times) / n) if n else 0.0,
        corrections_mean=(sum(corrections) / n) if n else 0.0,
        corrections_std=_population_std(corrections),
        debug_mean=(sum(debugs) / n) if n else 0.0,
        debug_std=_population_std(debugs),
        per_problem=ordered,
    )


def run_bench(
    manifest: DatasetManifest,
    cfg: EngineConfig,
    parallelism: int = 1,
    repeats: int = 5,
    *,
    context: "PipelineContext",
) -> BenchReport:
    """Run the full pipeline over every problem, ``repeats`` times each.

    Per-problem stage failures become ``stage_error`` records and never
    abort the sweep. Under replay the report is identical for any
    parallelism because each run gets its own cassette session and records
    are sorted before aggregation.
    """
    from .driver import solve_problem

    if context.executor is None:
        raise ValueError("run_bench requires an executor in the pipeline context")

    jobs = [(problem, repeat) for problem in manifest.problems for repeat in range(repeats)]

    def evaluate(job: tuple[ProblemInstance, int]) -> EvalRecord:
        problem, _repeat = job
        try:
            outcome = solve_problem(problem, context, cfg=cfg)
        except StageError:
            return EvalRecord(
                problem_id=problem.id, correct=False, failure_kind="stage_error"
            )
        correct, failure = judge(
            outcome.result,
            problem,
            context.rel_tol,
            check_solution=context.check_solution,
        )
        return EvalRecord(
            problem_id=problem.id,
            correct=correct,
            failure_kind=failure,
            corrections=outcome.trace.corrections_total,
            debug_attempts=outcome.debug_attempts,
            run_time=outcome.run_time,
        )

    if parallelism <= 1:
        records = [evaluate(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(evaluate, jobs))
    return aggregate(records)


def render_table(reports: dict[str, BenchReport], dataset: str) -> str:
    """Plain-text comparison table, one sub-column per verification method."""
    methods = list(reports)
    header = ["Dataset"]
    for metric in ("Accuracy (%)", "Run Time (s)", "# Corrections", "# Debugging Attempts"):
        for method in methods:
            header.append(f"{metric} [{method}]")
    row = [dataset]
    cells: list[str] = []
    for method in methods:
        cells.append(f"{reports[method].accuracy * 100:.1f}")
    for method in methods:
        cells.append(f"{reports[method].run_time_mean:.2f}")
    for method in methods:
        r = reports[method]
        cells.append(f"{r.corrections_mean:.2f} +/- {r.corrections_std:.2f}")
    for method in methods:
        r = reports[method]
        cells.append(f"{r.debug_mean:.2f} +/- {r.debug_std:.2f}")
    row.extend(cells)
    widths = [max(len(h), len(c)) for h, c in zip(header, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
        "  ".join(c.ljust(w) for c, w in zip(row, widths)),
    ]
    return "\n".join(lines)
