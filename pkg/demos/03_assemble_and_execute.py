"""Assembly, execution, and judgment for the cutting-stock problem.

The scripted cassette drives the whole pipeline: extraction, one aligned
translation round per anchor, assembly into a runnable program. If the
sandbox runner package is installed the program actually executes (HiGHS
finds 6 raw rolls, cut as [4, 2]); otherwise the demo judges a stubbed
execution result instead.

Run: python demos/03_assemble_and_execute.py
"""

import importlib.util
import sys

from _shared import FRAGMENTS, RECONSTRUCTIONS, load_problem, load_structured_json

from optanchor import (
    EngineConfig,
    ExecutionResult,
    Gateway,
    PipelineContext,
    RunnerClient,
    judge,
    solve_problem,
)
from optanchor.scripting import AnchorRound, CassetteScript

problem = load_problem()
script = CassetteScript()
plans = {
    i: [AnchorRound(code=FRAGMENTS[i], reconstruction=RECONSTRUCTIONS[i], aligned=True)]
    for i in range(4)
}
script.script_solve(problem, load_structured_json(), plans)

runner_available = importlib.util.find_spec("optrunner") is not None
executor = None
if runner_available:
    client = RunnerClient((sys.executable, "-m", "optrunner.cli"), default_timeout=120.0)
    executor = client.execute

context = PipelineContext(
    gateway=Gateway(mode="replay", cassette=script.cassette),
    executor=executor,
)
outcome = solve_problem(problem, context, EngineConfig())

print("assembled program:")
print("-" * 60)
print(outcome.program.source, end="")
print("-" * 60)
print(f"fragment spans: {len(outcome.program.fragment_spans)} "
      f"(parameters+variables: {sum(isinstance(k, str) for k in outcome.program.fragment_spans)}, "
      f"anchors: {sum(isinstance(k, int) for k in outcome.program.fragment_spans)})")
print()

if outcome.result is not None:
    result = outcome.result
    print(f"executed in the sandbox runner: status={result.status}, "
          f"objective={result.objective:g}, solution={result.solution}")
else:
    print("runner not installed; judging a stubbed execution result instead")
    result = ExecutionResult(status="optimal", objective=6.0, solution={"NumRollsCut": [4, 2]})

correct, failure = judge(result, problem, check_solution=True)
print(f"judged against ground truth (objective 6, rolls [4, 2]): "
      f"correct={correct}, failure={failure}")
