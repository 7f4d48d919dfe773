"""Minimal linear-modeling layer for generated programs.

Generated code builds a :class:`Model`, declares variables with
``addVars``, posts constraints with ``addConstr`` (operator overloading
turns ``expr <= bound`` into constraint rows), sets an objective, and calls
``optimize``. The model lowers to ``scipy.optimize.milp`` (HiGHS), so no
licensed solver is needed.

Data-level comparisons are tolerated: ``addConstr(True)`` is a no-op and
``addConstr(False)`` makes the model infeasible, because generated
constraints over parameters alone legitimately reduce to plain booleans.
"""

from __future__ import annotations

import json
import math
import os
import numbers

import numpy as np

VAR_TYPES = ("continuous", "integer", "binary")


class ModelingError(Exception):
    """The generated code used the modeling layer outside its linear scope."""


def _scalar(value) -> float:
    if isinstance(value, numbers.Real) or isinstance(value, np.generic):
        return float(value)
    raise ModelingError(f"expected a numeric scalar, got {type(value).__name__}")


class LinExpr:
    """An affine expression: sum of coefficient * variable plus a constant."""

    __slots__ = ("coeffs", "constant")

    def __init__(self, coeffs: dict[int, float] | None = None, constant: float = 0.0):
        self.coeffs = coeffs or {}
        self.constant = constant

    def _combine(self, other, sign: float) -> "LinExpr":
        coeffs = dict(self.coeffs)
        if isinstance(other, LinExpr):
            for index, coeff in other.coeffs.items():
                coeffs[index] = coeffs.get(index, 0.0) + sign * coeff
            constant = self.constant + sign * other.constant
        else:
            constant = self.constant + sign * _scalar(other)
        return LinExpr(coeffs, constant)

    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return (-self)._combine(other, 1.0)

    def __neg__(self):
        return LinExpr({i: -c for i, c in self.coeffs.items()}, -self.constant)

    def __mul__(self, other):
        if isinstance(other, LinExpr):
            raise ModelingError("products of variables are not linear")
        factor = _scalar(other)
        return LinExpr({i: c * factor for i, c in self.coeffs.items()}, self.constant * factor)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LinExpr):
            raise ModelingError("dividing by a variable is not linear")
        return self * (1.0 / _scalar(other))

    def __le__(self, other):
        diff = self - other
        return Constraint(diff.coeffs, -math.inf, -diff.constant)

    def __ge__(self, other):
        diff = self - other
        return Constraint(diff.coeffs, -diff.constant, math.inf)

    def __eq__(self, other):  # type: ignore[override]
        diff = self - other
        return Constraint(diff.coeffs, -diff.constant, -diff.constant)

    __hash__ = None  # expressions are not hashable; == builds a constraint


class Var(LinExpr):
    """A single decision variable (an expression with one unit coefficient)."""

    __slots__ = ("index", "name")

    def __init__(self, index: int, name: str):
        super().__init__({index: 1.0}, 0.0)
        self.index = index
        self.name = name

    def __repr__(self):
        return f"Var({self.name})"


class VarArray:
    """Nested, index-addressable container of variables."""

    def __init__(self, items: list):
        self._items = items

    def __getitem__(self, key):
        if isinstance(key, tuple):
            node = self
            for part in key:
                node = node[part]
            return node
        item = self._items[int(key)]
        return item

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


class Constraint:
    """One linear row with lower and upper bounds on expression value."""

    __slots__ = ("coeffs", "lb", "ub")

    def __init__(self, coeffs: dict[int, float], lb: float, ub: float):
        self.coeffs = coeffs
        self.lb = lb
        self.ub = ub

    def __bool__(self):
        raise ModelingError(
            "a constraint is not a boolean; pass it to addConstr instead of "
            "chaining comparisons"
        )


class Model:
    """Variable registry, constraint rows, objective, and the solve call."""

    def __init__(self):
        self._integrality: list[int] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._var_names: list[str] = []
        self._named: dict[str, tuple[tuple[int, ...], list[int]]] = {}
        self._rows: list[Constraint] = []
        self._objective: LinExpr | None = None
        self._sense: str = "minimize"
        self._trivially_infeasible = False
        self._status: str | None = None
        self._values: np.ndarray | None = None
        self._objective_value: float | None = None

    # -- declaration ---------------------------------------------------------

    def _new_var(self, vtype: str, lb: float, ub: float | None, name: str) -> Var:
        index = len(self._integrality)
        if vtype == "binary":
            self._integrality.append(1)
            self._lb.append(0.0)
            self._ub.append(1.0)
        else:
            self._integrality.append(1 if vtype == "integer" else 0)
            self._lb.append(float(lb))
            self._ub.append(math.inf if ub is None else float(ub))
        self._var_names.append(name)
        return Var(index, name)

    def addVars(self, dims=(), vtype: str = "continuous", name: str | None = None,
                lb: float = 0.0, ub: float | None = None):
        """Declare a scalar (empty dims) or an n-dimensional array of variables."""
        if vtype not in VAR_TYPES:
            raise ModelingError(f"variable type {vtype!r} not one of {VAR_TYPES}")
        if isinstance(dims, (int, np.integer)):
            dims = (int(dims),)
        dims = tuple(int(d) for d in dims)
        if any(d < 0 for d in dims):
            raise ModelingError(f"negative dimension in {dims}")
        label = name or f"v{len(self._integrality)}"
        indices: list[int] = []

        def build(level: int, prefix: str):
            if level == len(dims):
                var = self._new_var(vtype, lb, ub, f"{label}{prefix}")
                indices.append(var.index)
                return var
            return VarArray([build(level + 1, f"{prefix}[{k}]") for k in range(dims[level])])

        structure = build(0, "")
        if name is not None:
            self._named[name] = (dims, indices)
        return structure

    def addVar(self, vtype: str = "continuous", name: str | None = None,
               lb: float = 0.0, ub: float | None = None) -> Var:
        return self.addVars((), vtype=vtype, name=name, lb=lb, ub=ub)

    # -- constraints and objective -----------------------------------------------

    def addConstr(self, constraint) -> None:
        if isinstance(constraint, (bool, np.bool_)):
            # data-only comparisons collapse to booleans before we see them
            if not constraint:
                self._trivially_infeasible = True
            return
        if not isinstance(constraint, Constraint):
            raise ModelingError(
                f"addConstr expects a comparison of expressions, got {type(constraint).__name__}"
            )
        coeffs = {i: c for i, c in constraint.coeffs.items() if c != 0.0}
        if not coeffs:
            # variables cancelled out; the bounds decide feasibility outright
            if constraint.lb > 0.0 or constraint.ub < 0.0:
                self._trivially_infeasible = True
            return
        self._rows.append(Constraint(coeffs, constraint.lb, constraint.ub))

    def setObjective(self, expression, sense: str = "minimize") -> None:
        token = str(sense).strip().lower()
        if token.startswith("min"):
            self._sense = "minimize"
        elif token.startswith("max"):
            self._sense = "maximize"
        else:
            raise ModelingError(f"objective sense {sense!r} not understood")
        if isinstance(expression, LinExpr):
            self._objective = expression
        else:
            self._objective = LinExpr({}, _scalar(expression))

    # -- solving ------------------------------------------------------------

    def optimize(self) -> str:
        backend = os.environ.get("OPT_SOLVER", "highs")
        if backend != "highs":
            raise ModelingError(f"unknown solver backend {backend!r}")
        if self._trivially_infeasible:
            self._status = "infeasible"
            return self._status

        from scipy.optimize import Bounds, LinearConstraint, milp

        n = len(self._integrality)
        if n == 0:
            # degenerate but executable: a pure data-check program
            self._status = "optimal"
            self._values = np.zeros(0)
            self._objective_value = self._objective.constant if self._objective else 0.0
            return self._status

        c = np.zeros(n)
        constant = 0.0
        if self._objective is not None:
            for index, coeff in self._objective.coeffs.items():
                c[index] = coeff
            constant = self._objective.constant
        sign = -1.0 if self._sense == "maximize" else 1.0

        kwargs = {}
        if self._rows:
            a = np.zeros((len(self._rows), n))
            row_lb = np.empty(len(self._rows))
            row_ub = np.empty(len(self._rows))
            for r, row in enumerate(self._rows):
                for index, coeff in row.coeffs.items():
                    a[r, index] = coeff
                row_lb[r] = row.lb
                row_ub[r] = row.ub
            kwargs["constraints"] = LinearConstraint(a, row_lb, row_ub)

        result = milp(
            c=sign * c,
            integrality=np.array(self._integrality),
            bounds=Bounds(np.array(self._lb), np.array(self._ub)),
            **kwargs,
        )
        if result.status == 0:
            self._status = "optimal"
            self._values = result.x
            self._objective_value = sign * float(result.fun) + constant
        elif result.status == 2:
            self._status = "infeasible"
        elif result.status == 3:
            self._status = "unbounded"
        else:
            raise ModelingError(f"solver gave up: {result.message}")
        return self._status

    @property
    def status(self) -> str:
        if self._status is None:
            raise ModelingError("optimize() has not been called")
        return self._status

    @property
    def objective_value(self) -> float:
        if self._status != "optimal":
            raise ModelingError(f"no objective value in status {self._status!r}")
        return float(self._objective_value)

    def variable_value(self, var: Var) -> float:
        if self._values is None:
            raise ModelingError("optimize() has not been called")
        value = float(self._values[var.index])
        return float(round(value)) if self._integrality[var.index] else value

    def solution(self) -> dict:
        """Named variables as scalars or nested lists, integers rounded."""
        if self._values is None:
            raise ModelingError("no solution available")
        out: dict = {}
        for name, (dims, indices) in self._named.items():
            values = []
            for index in indices:
                value = float(self._values[index])
                values.append(int(round(value)) if self._integrality[index] else value)
            if not dims:
                out[name] = values[0]
            else:
                array = np.array(values).reshape(dims)
                out[name] = array.tolist()
        return out

    def write_result(self, path: str) -> None:
        """Emit the result contract: status, objective, named solution."""
        if self._status is None:
            raise ModelingError("optimize() has not been called")
        optimal = self._status == "optimal"
        doc = {
            "status": self._status,
            "objective": self.objective_value if optimal else None,
            "solution": self.solution() if optimal else None,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)
