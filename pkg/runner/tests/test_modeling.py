"""The linear-modeling layer: algebra, statuses, and solution shaping."""

from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from optrunner.modeling import LinExpr, Model, ModelingError, Var, VarArray


def test_cutting_stock_matches_enumeration_oracle():
    data = {
        "RollWidth": 10,
        "Widths": [2, 3, 5],
        "Orders": [4, 2, 2],
        "NumPatterns": 2,
        "NumRollsWidth": [[1, 2, 0], [0, 0, 1]],
        "NumWidths": 3,
    }
    patterns = data["NumRollsWidth"]

    # enumeration oracle over x in [0..10]^2
    best = None
    for x in itertools.product(range(11), repeat=2):
        ok = all(
            sum(patterns[j][i] * x[j] for j in range(2)) >= data["Orders"][i] for i in range(3)
        )
        if ok and (best is None or sum(x) < sum(best)):
            best = x
    assert best == (4, 2)

    model = Model()
    rolls = model.addVars([data["NumPatterns"]], vtype="integer", name="NumRollsCut")
    np_patterns = np.array(patterns)
    for i in range(data["NumWidths"]):
        model.addConstr(
            sum(np_patterns[j][i] * rolls[j] for j in range(data["NumPatterns"]))
            >= data["Orders"][i]
        )
    model.setObjective(sum(rolls[j] for j in range(data["NumPatterns"])), "minimize")
    assert model.optimize() == "optimal"
    assert model.objective_value == pytest.approx(float(sum(best)))
    assert model.solution() == {"NumRollsCut": list(best)}


def test_expression_algebra():
    model = Model()
    x = model.addVar(name="x")
    y = model.addVar(name="y")
    expr = 2 * x + y - 3
    assert isinstance(expr, LinExpr)
    assert expr.coeffs == {x.index: 2.0, y.index: 1.0}
    assert expr.constant == -3.0
    negated = -expr
    assert negated.coeffs == {x.index: -2.0, y.index: -1.0}
    halved = expr / 2
    assert halved.coeffs[x.index] == 1.0
    reversed_sub = 5 - x
    assert reversed_sub.coeffs == {x.index: -1.0}
    assert reversed_sub.constant == 5.0


def test_numpy_scalars_interoperate():
    model = Model()
    x = model.addVar(name="x")
    expr = np.int64(3) * x + np.float64(1.5)
    assert expr.coeffs == {x.index: 3.0}
    assert expr.constant == 1.5
    constraint = np.float64(4.0) <= x
    assert constraint.lb == 4.0


def test_nonlinear_terms_rejected():
    model = Model()
    x = model.addVar(name="x")
    y = model.addVar(name="y")
    with pytest.raises(ModelingError, match="not linear"):
        _ = x * y
    with pytest.raises(ModelingError, match="not linear"):
        _ = x / y


def test_constraint_is_not_a_boolean():
    model = Model()
    x = model.addVar(name="x")
    with pytest.raises(ModelingError, match="not a boolean"):
        bool(x <= 1)


def test_boolean_constraints_collapse():
    model = Model()
    x = model.addVar(name="x", ub=10)
    model.addConstr(True)
    model.addConstr(np.bool_(True))
    model.setObjective(x, "maximize")
    assert model.optimize() == "optimal"

    infeasible = Model()
    infeasible.addVar(name="x")
    infeasible.addConstr(False)
    assert infeasible.optimize() == "infeasible"


def test_cancelled_variables_decide_feasibility():
    model = Model()
    x = model.addVar(name="x")
    model.addConstr(x - x >= 1.0)  # 0 >= 1
    assert model.optimize() == "infeasible"


def test_infeasible_and_unbounded_statuses():
    model = Model()
    x = model.addVar(name="x", ub=1)
    model.addConstr(x >= 2)
    model.setObjective(x, "minimize")
    assert model.optimize() == "infeasible"
    with pytest.raises(ModelingError):
        _ = model.objective_value

    unbounded = Model()
    y = unbounded.addVar(name="y")
    unbounded.setObjective(y, "maximize")
    assert unbounded.optimize() == "unbounded"


def test_maximize_and_equality():
    model = Model()
    x = model.addVar(name="x", ub=10)
    y = model.addVar(name="y", ub=10)
    model.addConstr(x + y == 7)
    model.setObjective(2 * x + y, "maximize")
    assert model.optimize() == "optimal"
    assert model.objective_value == pytest.approx(14.0)  # x=7, y=0
    assert model.solution() == {"x": 7.0, "y": 0.0}


def test_binary_variables():
    model = Model()
    picks = model.addVars([3], vtype="binary", name="picks")
    values = [5.0, 1.0, 3.0]
    model.addConstr(sum(picks[i] for i in range(3)) <= 2)
    model.setObjective(sum(values[i] * picks[i] for i in range(3)), "maximize")
    assert model.optimize() == "optimal"
    assert model.objective_value == pytest.approx(8.0)
    assert model.solution() == {"picks": [1, 0, 1]}


def test_two_dimensional_variables_and_tuple_indexing():
    model = Model()
    grid = model.addVars([2, 2], name="grid")
    assert isinstance(grid, VarArray)
    assert isinstance(grid[0], VarArray)
    assert isinstance(grid[0][1], Var)
    assert grid[1, 0] is grid[1][0]
    model.addConstr(grid[0][0] + grid[0][1] >= 1)
    model.addConstr(grid[1][0] + grid[1][1] >= 2)
    model.setObjective(
        sum(grid[i][j] for i in range(2) for j in range(2)), "minimize"
    )
    assert model.optimize() == "optimal"
    assert model.objective_value == pytest.approx(3.0)
    solution = model.solution()
    assert np.array(solution["grid"]).shape == (2, 2)


def test_scalar_variable_solution_shape():
    model = Model()
    x = model.addVars([], vtype="integer", name="x", ub=4)
    model.setObjective(x, "maximize")
    model.optimize()
    assert model.solution() == {"x": 4}


def test_write_result_contract(tmp_path):
    model = Model()
    x = model.addVar(name="x", ub=3)
    model.setObjective(x, "maximize")
    model.optimize()
    path = tmp_path / "result.json"
    model.write_result(str(path))
    doc = json.loads(path.read_text())
    assert doc == {"status": "optimal", "objective": 3.0, "solution": {"x": 3.0}}

    infeasible = Model()
    y = infeasible.addVar(name="y", ub=0)
    infeasible.addConstr(y >= 1)
    infeasible.setObjective(y, "minimize")
    infeasible.optimize()
    infeasible.write_result(str(path))
    doc = json.loads(path.read_text())
    assert doc == {"status": "infeasible", "objective": None, "solution": None}


def test_usage_errors():
    model = Model()
    with pytest.raises(ModelingError):
        _ = model.status
    with pytest.raises(ModelingError):
        model.write_result("anywhere.json")
    with pytest.raises(ModelingError):
        model.addVars([2], vtype="fuzzy", name="x")
    with pytest.raises(ModelingError):
        model.setObjective(model.addVar(name="x"), "sideways")


def test_unknown_solver_backend_rejected(monkeypatch):
    monkeypatch.setenv("OPT_SOLVER", "cplex")
    model = Model()
    model.addVar(name="x")
    with pytest.raises(ModelingError, match="unknown solver backend"):
        model.optimize()
