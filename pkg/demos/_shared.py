"""Data and scripted responses shared by the demo walkthroughs."""

from __future__ import annotations

import json
from pathlib import Path

from optanchor import ProblemInstance

DATA_DIR = Path(__file__).parent / "data"


def load_problem() -> ProblemInstance:
    doc = json.loads((DATA_DIR / "cutting_stock_problem.json").read_text())
    return ProblemInstance(
        id=doc["id"],
        description=doc["description"],
        data=doc["data"],
        ground_truth_objective=float(doc["ground_truth_objective"]),
        ground_truth_solution=doc["ground_truth_solution"],
    )


def load_structured_json() -> str:
    return (DATA_DIR / "cutting_stock_structured.json").read_text()


# Hand-written fragments in the default dialect, one per anchor, plus the
# reconstructions a faithful agent would derive back from them.
FRAGMENTS = {
    0: (
        "for i in range(NumWidths):\n"
        "    model.addConstr(sum(NumRollsWidth[j][i] * NumRollsCut[j] "
        "for j in range(NumPatterns)) >= Orders[i])"
    ),
    1: (
        "for j in range(NumPatterns):\n"
        "    model.addConstr(sum(NumRollsWidth[j][i] * Widths[i] "
        "for i in range(NumWidths)) <= RollWidth)"
    ),
    2: "for j in range(NumPatterns):\n    model.addConstr(NumRollsCut[j] >= 0)",
    3: 'model.setObjective(sum(NumRollsCut[j] for j in range(NumPatterns)), "minimize")',
}

RECONSTRUCTIONS = {
    0: (
        "For every width, the rolls produced by all patterns together must cover at "
        "least the orders placed for that width"
    ),
    1: (
        "Each pattern j must keep the combined width of the rolls it produces within "
        "the width of the raw roll"
    ),
    2: "The number of raw rolls cut with each pattern j can never drop below zero",
    3: "The aim is to cut as few raw rolls as possible across all patterns",
}
