"""Shared fixtures: the cutting-stock reference problem and prompt library."""

from __future__ import annotations

import json

import pytest
from cutting_stock_fixture import (
    CUTTING_STOCK_DATA,
    CUTTING_STOCK_DESCRIPTION,
    CUTTING_STOCK_OPTIMUM,
    CUTTING_STOCK_SOLUTION,
    CUTTING_STOCK_STRUCTURED,
)

from optanchor import ProblemInstance, PromptLibrary, default_dialect, parse_structured_data


@pytest.fixture(scope="session")
def prompts() -> PromptLibrary:
    return PromptLibrary()


@pytest.fixture(scope="session")
def dialect():
    return default_dialect()


@pytest.fixture()
def cutting_stock_problem() -> ProblemInstance:
    return ProblemInstance(
        id="cutting_stock",
        description=CUTTING_STOCK_DESCRIPTION,
        data=dict(CUTTING_STOCK_DATA),
        ground_truth_objective=CUTTING_STOCK_OPTIMUM,
        ground_truth_solution={"NumRollsCut": CUTTING_STOCK_SOLUTION},
    )


@pytest.fixture()
def cutting_stock_json() -> str:
    return json.dumps(CUTTING_STOCK_STRUCTURED, indent=4)


@pytest.fixture()
def cutting_stock_structured(cutting_stock_problem, cutting_stock_json):
    return parse_structured_data(cutting_stock_json, cutting_stock_problem)
