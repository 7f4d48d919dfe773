"""Assembly determinism, span bookkeeping, and the debug loop."""

from __future__ import annotations

import pytest

from cutting_stock_fixture import CUTTING_STOCK_FRAGMENTS

from optanchor import (
    AssembledProgram,
    CandidateModel,
    Cassette,
    Debugger,
    ExecutionResult,
    Gateway,
    IncompleteModel,
    ParseError,
    assemble,
    render_simple,
)


def cutting_stock_model(s, dialect) -> CandidateModel:
    return CandidateModel(
        simp_fragments=tuple(render_simple(s, dialect)),
        sem_fragments=dict(CUTTING_STOCK_FRAGMENTS),
        dialect=dialect,
    )


def test_assemble_span_map_counts(cutting_stock_structured, dialect):
    program = assemble(cutting_stock_structured, cutting_stock_model(cutting_stock_structured, dialect))
    symbol_spans = [k for k in program.fragment_spans if isinstance(k, str)]
    anchor_spans = [k for k in program.fragment_spans if isinstance(k, int)]
    assert len(symbol_spans) == 7  # 6 parameters + 1 variable
    assert len(anchor_spans) == 4  # 3 constraints + objective
    assert len(program.fragment_spans) == 11


def test_assemble_spans_cover_fragments_disjointly(cutting_stock_structured, dialect):
    model = cutting_stock_model(cutting_stock_structured, dialect)
    program = assemble(cutting_stock_structured, model)
    lines = program.source.split("\n")
    claimed: set[int] = set()
    for key, (start, end) in program.fragment_spans.items():
        assert start <= end
        span_lines = set(range(start, end + 1))
        assert not span_lines & claimed, f"span {key} overlaps another fragment"
        claimed |= span_lines
    # every span reproduces its fragment text exactly
    rendered = dict(model.simp_fragments)
    for key, (start, end) in program.fragment_spans.items():
        text = "\n".join(lines[start - 1 : end])
        if isinstance(key, str):
            assert text == rendered[key]
        else:
            assert text == model.sem_fragments[key]


def test_assemble_is_deterministic(cutting_stock_structured, dialect):
    model = cutting_stock_model(cutting_stock_structured, dialect)
    first = assemble(cutting_stock_structured, model)
    second = assemble(cutting_stock_structured, model)
    assert first.source == second.source
    assert first.fragment_spans == second.fragment_spans


def test_assemble_differs_when_fragments_differ(cutting_stock_structured, dialect):
    base = cutting_stock_model(cutting_stock_structured, dialect)
    changed_fragments = dict(CUTTING_STOCK_FRAGMENTS)
    changed_fragments[2] = "model.addConstr(NumRollsCut[0] >= 1)"
    changed = CandidateModel(
        simp_fragments=base.simp_fragments,
        sem_fragments=changed_fragments,
        dialect=dialect,
    )
    assert assemble(cutting_stock_structured, base).source != assemble(
        cutting_stock_structured, changed
    ).source


def test_assemble_contains_boilerplate(cutting_stock_structured, dialect):
    program = assemble(cutting_stock_structured, cutting_stock_model(cutting_stock_structured, dialect))
    assert program.source.startswith(dialect.boilerplate_header.split("\n")[0])
    assert dialect.boilerplate_footer in program.source
    assert 'OPT_RESULT_PATH' in program.source


def test_assemble_rejects_incomplete_model(cutting_stock_structured, dialect):
    fragments = dict(CUTTING_STOCK_FRAGMENTS)
    del fragments[3]
    model = CandidateModel(
        simp_fragments=tuple(render_simple(cutting_stock_structured, dialect)),
        sem_fragments=fragments,
        dialect=dialect,
    )
    with pytest.raises(IncompleteModel, match=r"\[3\]"):
        assemble(cutting_stock_structured, model)


def test_execution_result_invariants():
    with pytest.raises(ValueError):
        ExecutionResult(status="optimal", objective=None)
    with pytest.raises(ValueError):
        ExecutionResult(status="runtime_error", error_text=None)
    with pytest.raises(ValueError):
        ExecutionResult(status="made_up")
    ok = ExecutionResult(status="optimal", objective=6.0, solution={"x": 1})
    assert ok.objective == 6.0


class StubExecutor:
    """Returns scripted results in order and remembers received sources."""

    def __init__(self, results):
        self.results = list(results)
        self.sources: list[str] = []

    def __call__(self, source: str) -> ExecutionResult:
        self.sources.append(source)
        return self.results.pop(0)


def _debugger(prompts, problem, repairs, executor) -> Debugger:
    """repairs: list of (broken_source, error_text, fixed_source)."""
    cassette = Cassette()
    for broken, error, fixed in repairs:
        prompt = prompts.render(
            "debug", description=problem.description, program=broken, error=error
        )
        cassette.add("debug", prompt, f"CODE:\n=====\n{fixed}\n=====")
    gateway = Gateway(mode="replay", cassette=cassette)
    return Debugger(gateway, prompts, execute=executor)


def test_debug_rejects_non_error_entry(prompts, cutting_stock_problem, dialect):
    debugger = _debugger(prompts, cutting_stock_problem, [], StubExecutor([]))
    program = AssembledProgram(source="x = 1\n", dialect=dialect)
    good = ExecutionResult(status="optimal", objective=6.0)
    with pytest.raises(ValueError, match="must not run"):
        debugger.debug(program, good, cutting_stock_problem)


def test_debug_fixes_on_first_attempt(prompts, cutting_stock_problem, dialect):
    broken = "print(undefined_name)\n"
    fixed = "print(1)\n"
    executor = StubExecutor([ExecutionResult(status="optimal", objective=6.0)])
    debugger = _debugger(
        prompts,
        cutting_stock_problem,
        [(broken, "NameError: name 'undefined_name' is not defined", fixed)],
        executor,
    )
    program = AssembledProgram(source=broken, dialect=dialect)
    failure = ExecutionResult(
        status="runtime_error", error_text="NameError: name 'undefined_name' is not defined"
    )
    final_prog, final_result, attempts = debugger.debug(program, failure, cutting_stock_problem)
    assert attempts == 1
    assert final_result.status == "optimal"
    assert final_prog.source == fixed
    assert executor.sources == [fixed]
    # spans do not survive wholesale replacement
    assert final_prog.fragment_spans == {}


def test_debug_gives_up_after_three_attempts(prompts, cutting_stock_problem, dialect):
    sources = [f"broken_{i}\n" for i in range(4)]
    error = "SyntaxError: invalid syntax"
    repairs = [(sources[i], error, sources[i + 1]) for i in range(3)]
    executor = StubExecutor(
        [ExecutionResult(status="runtime_error", error_text=error) for _ in range(3)]
    )
    debugger = _debugger(prompts, cutting_stock_problem, repairs, executor)
    program = AssembledProgram(source=sources[0], dialect=dialect)
    failure = ExecutionResult(status="runtime_error", error_text=error)
    _, final_result, attempts = debugger.debug(program, failure, cutting_stock_problem)
    assert attempts == 3
    assert final_result.status == "runtime_error"
    assert len(executor.sources) == 3


def test_debug_handles_contract_violation(prompts, cutting_stock_problem, dialect):
    broken = "pass\n"
    fixed = "ok = True\n"
    executor = StubExecutor([ExecutionResult(status="optimal", objective=1.0)])
    debugger = _debugger(
        prompts,
        cutting_stock_problem,
        [(broken, "(no error output; execution status: contract_violation)", fixed)],
        executor,
    )
    program = AssembledProgram(source=broken, dialect=dialect)
    failure = ExecutionResult(status="contract_violation")
    _, final_result, attempts = debugger.debug(program, failure, cutting_stock_problem)
    assert attempts == 1
    assert final_result.status == "optimal"


def test_debug_malformed_response_raises_after_reprompt(prompts, cutting_stock_problem, dialect):
    cassette = Cassette()
    prompt = prompts.render(
        "debug", description=cutting_stock_problem.description, program="bad\n", error="boom"
    )
    cassette.add("debug", prompt, "no fences")
    cassette.add("debug", prompt, "still no fences")
    debugger = Debugger(
        Gateway(mode="replay", cassette=cassette), prompts, execute=StubExecutor([])
    )
    program = AssembledProgram(source="bad\n", dialect=dialect)
    failure = ExecutionResult(status="runtime_error", error_text="boom")
    with pytest.raises(ParseError, match="debug"):
        debugger.debug(program, failure, cutting_stock_problem)
