"""The anchor-driven correction loop, on a scripted eight-anchor fixture.

Every agent response is pre-recorded in an in-memory cassette, so the loop
runs fully offline. Two anchors are scripted to come right at each of
iterations 2 through 5, which makes the misaligned-anchor count fall
8 -> 6 -> 4 -> 2 -> 0: only the anchors that failed verification are
regenerated, and the loop stops the moment the error set is empty.

Run: python demos/02_correction_loop.py
"""

import json

from optanchor import (
    CorrectionEngine,
    EngineConfig,
    Gateway,
    ProblemInstance,
    default_dialect,
)
from optanchor.scripting import AnchorRound, CassetteScript

ALIGN_AT = {0: 2, 1: 2, 2: 3, 3: 3, 4: 4, 5: 4, 6: 5, 7: 5}

problem = ProblemInstance(
    id="workshop",
    description=(
        "A workshop schedules eight kinds of jobs on shared machines; each job kind "
        "has an operating rule, and the shop wants the largest total payoff."
    ),
    data={},
)
document = {
    "parameters": [],
    "variables": {},
    "constraints": [
        {
            "description": f"Job kind {i} must respect machine availability window {i}",
            "code": None,
            "error": "",
        }
        for i in range(7)
    ],
    "objective": {
        "description": "Maximize the total payoff over all scheduled jobs",
        "code": None,
        "error": "",
    },
}

script = CassetteScript()
plans = {}
for anchor_id, align_at in ALIGN_AT.items():
    rounds = [
        AnchorRound(
            code=f"model.addConstr(load_{anchor_id} <= window_{anchor_id})  # draft {k}",
            reconstruction=f"Draft {k} of rule {anchor_id}, still missing the real intent",
            aligned=False,
        )
        for k in range(1, align_at)
    ]
    rounds.append(
        AnchorRound(
            code=f"model.addConstr(load_{anchor_id} <= window_{anchor_id})  # final",
            reconstruction=f"Rule {anchor_id} keeps its job kind inside its availability window",
            aligned=True,
        )
    )
    plans[anchor_id] = rounds

structured = script.script_solve(problem, json.dumps(document), plans)
gateway = Gateway(mode="replay", cassette=script.cassette)

engine = CorrectionEngine(gateway)
model, trace = engine.run(structured, default_dialect(), EngineConfig(t_max=5))

print(f"misaligned anchors per iteration: {trace.error_set_sizes}")
print(f"total corrections: {trace.corrections_total}")
print()
print("per-anchor timeline:")
for iteration, anchor_id, event, detail in trace.anchor_events:
    suffix = f"  ({detail})" if detail else ""
    print(f"  t={iteration}  anchor {anchor_id}: {event}{suffix}")
