"""End-to-end pipeline for one problem: extract, correct, assemble, execute.

Shared by the CLI ``solve`` command and the bench sweep. The executor is a
callable ``(source, data, timeout) -> ExecutionResult``; production wires in
:class:`~optanchor.runner_client.RunnerClient`, tests inject stubs. With no
executor the pipeline stops after assembly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .assemble import (
    DEBUGGABLE_STATUSES,
    AssembledProgram,
    Debugger,
    ExecutionResult,
    assemble,
)
from .engine import CorrectionEngine, EngineConfig, RunTrace, StageError, AGENT_FAILURES
from .gateway import Gateway
from .prompting import PromptLibrary
from .schema import CandidateModel, ProblemInstance, StructuredData
from .translate import TargetDialect, Translator, default_dialect

Executor = Callable[[str, dict[str, Any], float], ExecutionResult]


@dataclass
class PipelineContext:
    """Everything a solve needs beyond the problem itself."""

    gateway: Gateway
    prompts: PromptLibrary = field(default_factory=PromptLibrary)
    dialect: TargetDialect = field(default_factory=default_dialect)
    executor: Executor | None = None
    execution_timeout: float = 60.0
    debug_max_attempts: int = 3
    rel_tol: float = 1e-4
    check_solution: bool = False
    translate_temperature: float = 0.2
    max_tokens: int = 4096


@dataclass
class SolveOutcome:
    problem_id: str
    structured: StructuredData
    model: CandidateModel
    trace: RunTrace
    program: AssembledProgram
    result: ExecutionResult | None
    debug_attempts: int
    run_time: float


def solve_problem(
    problem: ProblemInstance,
    context: PipelineContext,
    cfg: EngineConfig | None = None,
) -> SolveOutcome:
    """Run the full pipeline for one problem.

    Uses a fresh gateway session so replayed multi-response fingerprints
    start from their first entry and concurrent solves stay independent.
    """
    cfg = cfg or EngineConfig()
    session = context.gateway.session()
    started = time.perf_counter()

    translator = Translator(
        session,
        context.prompts,
        temperature=context.translate_temperature,
        max_tokens=context.max_tokens,
    )
    try:
        structured = translator.extract(problem)
    except AGENT_FAILURES as exc:
        raise StageError("extract", 0, None, exc) from exc

    engine = CorrectionEngine(
        session,
        context.prompts,
        translate_temperature=context.translate_temperature,
        max_tokens=context.max_tokens,
    )
    model, trace = engine.run(structured, context.dialect, cfg)
    program = assemble(structured, model)

    result: ExecutionResult | None = None
    debug_attempts = 0
    if context.executor is not None:
        result = context.executor(program.source, problem.data, context.execution_timeout)
        if result.status in DEBUGGABLE_STATUSES and context.debug_max_attempts > 0:
            debugger = Debugger(
                session,
                context.prompts,
                execute=lambda src: context.executor(
                    src, problem.data, context.execution_timeout
                ),
            )
            program, result, debug_attempts = debugger.debug(
                program, result, problem, context.debug_max_attempts
            )

    return SolveOutcome(
        problem_id=problem.id,
        structured=structured,
        model=model,
        trace=trace,
        program=program,
        result=result,
        debug_attempts=debug_attempts,
        run_time=time.perf_counter() - started,
    )
