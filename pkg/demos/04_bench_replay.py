"""A benchmark sweep over a two-problem replay corpus.

Problem "alpha" is scripted to need three corrections before its anchors
align; "beta" comes right immediately. Execution is stubbed to return each
problem's true optimum, so the sweep is about the accounting: accuracy,
correction counts, and their spread, reported in the comparison-table
layout.

Run: python demos/04_bench_replay.py
"""

import json

from optanchor import (
    DatasetManifest,
    EngineConfig,
    ExecutionResult,
    Gateway,
    PipelineContext,
    ProblemInstance,
    run_bench,
)
from optanchor.bench import render_table
from optanchor.scripting import AnchorRound, CassetteScript


def scripted_problem(script: CassetteScript, problem_id: str, align_at: dict[int, int]):
    problem = ProblemInstance(
        id=problem_id,
        description=f"The {problem_id} production problem: one rule, one goal.",
        data={},
        ground_truth_objective=42.0,
    )
    document = {
        "parameters": [],
        "variables": {},
        "constraints": [
            {
                "description": f"The {problem_id} line stays within its daily quota",
                "code": None,
                "error": "",
            }
        ],
        "objective": {
            "description": f"Maximize {problem_id} output value",
            "code": None,
            "error": "",
        },
    }
    plans = {}
    for anchor_id, first_aligned in align_at.items():
        rounds = [
            AnchorRound(
                code=f"model.addConstr(rate_{problem_id}_{anchor_id} <= quota)  # draft {k}",
                reconstruction=f"Draft {k} of the {problem_id} rule {anchor_id}",
                aligned=False,
            )
            for k in range(1, first_aligned)
        ]
        rounds.append(
            AnchorRound(
                code=f"model.addConstr(rate_{problem_id}_{anchor_id} <= quota)  # final",
                reconstruction=f"The {problem_id} rule {anchor_id}, faithfully restated",
                aligned=True,
            )
        )
        plans[anchor_id] = rounds
    script.script_solve(problem, json.dumps(document), plans)
    return problem


script = CassetteScript()
alpha = scripted_problem(script, "alpha", {0: 3, 1: 2})  # error sets [2, 1, 0] -> 3 corrections
beta = scripted_problem(script, "beta", {0: 1, 1: 1})  # aligned at once -> 0 corrections

context = PipelineContext(
    gateway=Gateway(mode="replay", cassette=script.cassette),
    executor=lambda source, data, timeout: ExecutionResult(
        status="optimal", objective=42.0, solution={}
    ),
)
manifest = DatasetManifest(name="duo", problems=(alpha, beta))
report = run_bench(manifest, EngineConfig(), parallelism=2, repeats=1, context=context)

print(render_table({"LLM": report}, manifest.name))
print()
for record in report.per_problem:
    print(
        f"  {record.problem_id}: correct={record.correct} "
        f"corrections={record.corrections} debug_attempts={record.debug_attempts}"
    )
print()
print(f"corrections mean {report.corrections_mean} / std {report.corrections_std} "
      "(alpha needed 3, beta none)")
