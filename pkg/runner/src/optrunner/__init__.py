"""Sandboxed execution of generated optimization programs.

Programs are run as child processes in throwaway working directories,
under a hard deadline, and report through a JSON result contract. The
bundled modeling layer (:mod:`optrunner.modeling`) lowers linear models
to an open-source MILP backend.
"""

from .modeling import Constraint, LinExpr, Model, ModelingError, Var, VarArray
from .runner import RESULT_ENV, SOLVER_ENV, SandboxRequest, execute

__version__ = "0.1.0"

__all__ = [
    "Constraint",
    "LinExpr",
    "Model",
    "ModelingError",
    "RESULT_ENV",
    "SOLVER_ENV",
    "SandboxRequest",
    "Var",
    "VarArray",
    "execute",
]
