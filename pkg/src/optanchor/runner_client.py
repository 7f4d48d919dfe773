"""Client for the external sandbox runner process.

The runner is a separate executable (shipped as the ``optanchor-runner``
package). The protocol is line-delimited JSON: this client writes one
``{"source", "data", "timeout"}`` object to the runner's stdin and reads
one execution-result object from its stdout. The runner exits 0 unless it
is itself broken; program failures come back inside the result object.
"""

from __future__ import annotations

import json
import subprocess
from typing import Any, Sequence

from .assemble import ExecutionResult

DEFAULT_COMMAND = ("optrunner",)


class SandboxUnavailable(RuntimeError):
    """The runner executable is missing or itself failed."""


def result_from_wire(doc: dict[str, Any]) -> ExecutionResult:
    objective = doc.get("objective")
    return ExecutionResult(
        status=doc["status"],
        objective=None if objective is None else float(objective),
        solution=doc.get("solution"),
        error_text=doc.get("error_text"),
        wall_time=float(doc.get("wall_time", 0.0)),
    )


class RunnerClient:
    """Spawns the runner per request and speaks the line-JSON protocol."""

    def __init__(
        self,
        command: Sequence[str] = DEFAULT_COMMAND,
        *,
        solver: str | None = None,
        default_timeout: float = 60.0,
    ):
        self.command = list(command)
        if solver:
            self.command += ["--solver", solver]
        self.default_timeout = default_timeout

    def execute(
        self, source: str, data: dict[str, Any], timeout: float | None = None
    ) -> ExecutionResult:
        limit = timeout if timeout is not None else self.default_timeout
        payload = json.dumps({"source": source, "data": data, "timeout": limit})
        try:
            proc = subprocess.run(
                self.command,
                input=payload + "\n",
                capture_output=True,
                text=True,
                # The runner enforces the program deadline itself; the grace
                # period only covers runner startup and teardown.
                timeout=limit + 30.0,
            )
        except FileNotFoundError as exc:
            raise SandboxUnavailable(
                f"runner executable not found: {self.command[0]!r}"
            ) from exc
        except subprocess.TimeoutExpired as exc:
            raise SandboxUnavailable(f"runner did not answer within grace period: {exc}") from exc
        if proc.returncode != 0:
            tail = (proc.stderr or "")[-2048:]
            raise SandboxUnavailable(f"runner exited {proc.returncode}: {tail}")
        line = next((l for l in proc.stdout.splitlines() if l.strip()), None)
        if line is None:
            raise SandboxUnavailable("runner produced no output")
        try:
            return result_from_wire(json.loads(line))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise SandboxUnavailable(f"runner output not understood: {exc}") from exc
