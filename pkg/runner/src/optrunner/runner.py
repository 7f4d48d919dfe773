"""Isolated execution of one generated program with a JSON result contract.

Each request gets a fresh working directory holding ``program.py`` and
``data.json``. The program runs as a child process (its own session, so the
whole process tree can be killed on timeout) and must write the contract
file named by the ``OPT_RESULT_PATH`` environment variable:

    {"status": "optimal" | "infeasible" | "unbounded",
     "objective": number | null,
     "solution": {symbol: number | nested array} | null}

Program failures never raise here; every behavior maps to a result dict:
nonzero exit -> runtime_error (with the stderr tail), deadline -> timeout,
clean exit without a valid contract -> contract_violation.

Isolation is process-level only: suitable for trusted desk-scale corpora,
not for adversarial code.
"""

from __future__ import annotations

import json
import os
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

RESULT_ENV = "OPT_RESULT_PATH"
SOLVER_ENV = "OPT_SOLVER"
CONTRACT_STATUSES = ("optimal", "infeasible", "unbounded")
STDERR_TAIL_BYTES = 4096


@dataclass(frozen=True)
class SandboxRequest:
    source: str
    data: dict
    timeout: float = 60.0
    workdir: str | None = None

    def __post_init__(self) -> None:
        if not self.source:
            raise ValueError("source must be non-empty")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_wire(cls, doc: dict) -> "SandboxRequest":
        return cls(
            source=doc["source"],
            data=doc.get("data", {}),
            timeout=float(doc.get("timeout", 60.0)),
            workdir=doc.get("workdir"),
        )


def _kill_tree(proc: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass
    proc.wait()


def _tail(text: bytes) -> str:
    return text[-STDERR_TAIL_BYTES:].decode("utf-8", errors="replace")


def _parse_contract(path: Path) -> tuple[dict | None, str | None]:
    """Returns (result fields, error) where exactly one side is set."""
    if not path.exists():
        return None, "program exited cleanly but wrote no result file"
    try:
        doc = json.loads(path.read_text())
    except (json.JSONDecodeError, OSError) as exc:
        return None, f"result file is not valid JSON: {exc}"
    if not isinstance(doc, dict):
        return None, "result file must hold a JSON object"
    status = doc.get("status")
    if status not in CONTRACT_STATUSES:
        return None, f"result status {status!r} not one of {CONTRACT_STATUSES}"
    objective = doc.get("objective")
    if status == "optimal" and not isinstance(objective, (int, float)):
        return None, "optimal result must carry a numeric objective"
    solution = doc.get("solution")
    if solution is not None and not isinstance(solution, dict):
        return None, "solution must be an object keyed by symbol"
    return {
        "status": status,
        "objective": None if objective is None else float(objective),
        "solution": solution,
    }, None


def execute(request: SandboxRequest, solver: str = "highs") -> dict:
    """Run one program to completion; always returns a result dict."""
    owns_workdir = request.workdir is None
    workdir = Path(request.workdir) if request.workdir else Path(tempfile.mkdtemp(prefix="optrun_"))
    workdir.mkdir(parents=True, exist_ok=True)
    try:
        (workdir / "program.py").write_text(request.source)
        (workdir / "data.json").write_text(json.dumps(request.data))
        result_path = workdir / "result.json"
        env = dict(os.environ)
        env[RESULT_ENV] = str(result_path)
        env[SOLVER_ENV] = solver

        started = time.perf_counter()
        proc = subprocess.Popen(
            [sys.executable, "program.py"],
            cwd=workdir,
            env=env,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            start_new_session=True,
        )
        try:
            _out, err = proc.communicate(timeout=request.timeout)
        except subprocess.TimeoutExpired:
            _kill_tree(proc)
            wall = time.perf_counter() - started
            return {
                "status": "timeout",
                "objective": None,
                "solution": None,
                "error_text": f"killed after exceeding the {request.timeout:g}s deadline",
                "wall_time": wall,
            }
        wall = time.perf_counter() - started

        if proc.returncode != 0:
            return {
                "status": "runtime_error",
                "objective": None,
                "solution": None,
                "error_text": _tail(err) or f"exit code {proc.returncode}",
                "wall_time": wall,
            }
        contract, problem = _parse_contract(result_path)
        if contract is None:
            return {
                "status": "contract_violation",
                "objective": None,
                "solution": None,
                "error_text": problem,
                "wall_time": wall,
            }
        contract.update({"error_text": None, "wall_time": wall})
        return contract
    finally:
        if owns_workdir:
            shutil.rmtree(workdir, ignore_errors=True)
