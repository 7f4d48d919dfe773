"""Program assembly and the solver-feedback debugging loop.

Assembly concatenates, in a fixed order: the dialect header, the rendered
parameter and variable declarations, the per-anchor fragments, and the
dialect footer (which solves the model and writes the result contract
file). Line spans for every fragment are recorded so failures can be
attributed back to a symbol or anchor.

Debugging is whole-program: solver and runtime error messages rarely
localize to one fragment, so each attempt rewrites the full source and
re-executes, up to a fixed attempt budget. Infeasible and unbounded are
solver verdicts, not execution errors, and never trigger debugging.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .gateway import CompletionRequest, Gateway
from .prompting import ParseError, PromptLibrary, parse_fenced
from .schema import CandidateModel, ProblemInstance, StructuredData
from .translate import TargetDialect

EXECUTION_STATUSES = (
    "optimal",
    "infeasible",
    "unbounded",
    "runtime_error",
    "timeout",
    "contract_violation",
)

DEBUGGABLE_STATUSES = ("runtime_error", "contract_violation")


class IncompleteModel(ValueError):
    """The candidate model is missing code for at least one anchor."""


@dataclass(frozen=True)
class ExecutionResult:
    status: str
    objective: float | None = None
    solution: dict[str, Any] | None = None
    error_text: str | None = None
    wall_time: float = 0.0

    def __post_init__(self) -> None:
        if self.status not in EXECUTION_STATUSES:
            raise ValueError(f"status {self.status!r} not one of {EXECUTION_STATUSES}")
        if self.status == "optimal" and self.objective is None:
            raise ValueError("optimal results must carry an objective")
        if self.status == "runtime_error" and not self.error_text:
            raise ValueError("runtime_error results must carry error text")


@dataclass(frozen=True)
class AssembledProgram:
    """Full program text plus fragment line spans (1-based, inclusive).

    Span keys are parameter/variable symbols (str) and anchor ids (int).
    A program rewritten by the debugger has no spans: attribution is lost
    once the source is replaced wholesale.
    """

    source: str
    dialect: TargetDialect
    fragment_spans: dict[Any, tuple[int, int]] = field(default_factory=dict)


def assemble(s: StructuredData, m: CandidateModel) -> AssembledProgram:
    """Deterministic concatenation of header, fragments, and footer."""
    missing = [
        a.anchor_id for a in s.anchors if not m.sem_fragments.get(a.anchor_id)
    ]
    if missing:
        raise IncompleteModel(f"missing code for anchor ids {missing}")

    lines: list[str] = []
    spans: dict[Any, tuple[int, int]] = {}

    def push(text: str) -> tuple[int, int]:
        start = len(lines) + 1
        lines.extend(text.split("\n"))
        return (start, len(lines))

    push(m.dialect.boilerplate_header)
    lines.append("")
    for symbol, code in m.simp_fragments:
        spans[symbol] = push(code)
    lines.append("")
    for anchor in s.anchors:
        spans[anchor.anchor_id] = push(m.sem_fragments[anchor.anchor_id])
        lines.append("")
    push(m.dialect.boilerplate_footer)

    return AssembledProgram(
        source="\n".join(lines) + "\n",
        dialect=m.dialect,
        fragment_spans=spans,
    )


class Debugger:
    """Error-message-driven repair of an assembled program.

    ``execute`` runs a program source and returns an :class:`ExecutionResult`;
    the caller binds data and timeout into it.
    """

    def __init__(
        self,
        gateway: Gateway,
        prompts: PromptLibrary | None = None,
        execute: Callable[[str], ExecutionResult] | None = None,
        *,
        temperature: float = 0.2,
        max_tokens: int = 8192,
    ):
        if execute is None:
            raise ValueError("Debugger requires an execute callable")
        self.gateway = gateway
        self.prompts = prompts or PromptLibrary()
        self.execute = execute
        self.temperature = temperature
        self.max_tokens = max_tokens

    def debug_prompt(self, source: str, result: ExecutionResult, problem: ProblemInstance) -> str:
        error = result.error_text or f"(no error output; execution status: {result.status})"
        return self.prompts.render(
            "debug",
            description=problem.description,
            program=source,
            error=error,
        )

    def debug(
        self,
        prog: AssembledProgram,
        result: ExecutionResult,
        problem: ProblemInstance,
        max_attempts: int = 3,
    ) -> tuple[AssembledProgram, ExecutionResult, int]:
        """Repair-and-rerun loop; returns the final program, result, attempts."""
        if result.status not in DEBUGGABLE_STATUSES:
            raise ValueError(
                f"debug must not run on status {result.status!r}; "
                f"only {DEBUGGABLE_STATUSES} are debuggable"
            )
        attempts = 0
        current_prog, current_result = prog, result
        while attempts < max_attempts and current_result.status in DEBUGGABLE_STATUSES:
            new_source = self._repair(current_prog.source, current_result, problem)
            current_prog = AssembledProgram(source=new_source, dialect=prog.dialect)
            attempts += 1
            current_result = self.execute(new_source)
        return current_prog, current_result, attempts

    def _repair(
        self, source: str, result: ExecutionResult, problem: ProblemInstance
    ) -> str:
        prompt = self.debug_prompt(source, result, problem)
        last_error: Exception | None = None
        for attempt in range(2):
            text = self.gateway.complete(
                CompletionRequest(
                    prompt=prompt,
                    temperature=self.temperature,
                    max_tokens=self.max_tokens,
                    tag="debug",
                )
            )
            try:
                # fenced payloads are stripped; restore the trailing newline
                # so program files stay consistent across repair rounds
                return parse_fenced(text, self.prompts.header("debug")) + "\n"
            except ParseError as exc:
                last_error = exc
        raise ParseError(f"debug: {last_error}") from last_error
