"""Operator configuration: file plus flag overrides.

The config file is JSON with optional sections ``gateway``, ``verifier``,
``engine``, ``sandbox``, ``debug``, and a top-level ``dialect`` path.
Command-line flags override file values; the provider API key is read from
the environment variable named by ``gateway.api_key_env``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .driver import PipelineContext
from .engine import EngineConfig
from .gateway import Gateway, GatewayConfig
from .prompting import PromptLibrary
from .runner_client import RunnerClient
from .translate import default_dialect, load_dialect
from .verify import VerifierConfig

DEFAULT_API_KEY_ENV = "OPTANCHOR_API_KEY"


class ConfigError(ValueError):
    pass


@dataclass
class CliConfig:
    gateway_mode: str = "replay"
    cassette_path: str | None = None
    base_url: str = "http://localhost:8000/v1"
    chat_model: str = "gpt-4o"
    embed_model: str = "all-MiniLM-L6-v2"
    api_key_env: str = DEFAULT_API_KEY_ENV
    temperature: float = 0.2
    max_tokens: int = 4096
    verifier_method: str = "llm"
    tau: float = 0.75
    t_max: int = 5
    freeze_aligned: bool = True
    dialect_path: str | None = None
    runner_command: list[str] = field(default_factory=lambda: ["optrunner"])
    solver: str | None = None
    execution_timeout: float = 60.0
    debug_attempts: int = 3
    parallel: int = 1
    repeats: int = 5
    rel_tol: float = 1e-4
    check_solution: bool = False

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides: Any) -> CliConfig:
        cfg = cls()
        if path is not None:
            doc = json.loads(Path(path).read_text())
            gw = doc.get("gateway", {})
            cfg.gateway_mode = gw.get("mode", cfg.gateway_mode)
            cfg.cassette_path = gw.get("cassette", cfg.cassette_path)
            cfg.base_url = gw.get("base_url", cfg.base_url)
            cfg.chat_model = gw.get("chat_model", cfg.chat_model)
            cfg.embed_model = gw.get("embed_model", cfg.embed_model)
            cfg.api_key_env = gw.get("api_key_env", cfg.api_key_env)
            cfg.temperature = gw.get("temperature", cfg.temperature)
            cfg.max_tokens = gw.get("max_tokens", cfg.max_tokens)
            ver = doc.get("verifier", {})
            cfg.verifier_method = ver.get("method", cfg.verifier_method)
            cfg.tau = ver.get("tau", cfg.tau)
            eng = doc.get("engine", {})
            cfg.t_max = eng.get("t_max", cfg.t_max)
            cfg.freeze_aligned = eng.get("freeze_aligned", cfg.freeze_aligned)
            cfg.dialect_path = doc.get("dialect", cfg.dialect_path)
            sandbox = doc.get("sandbox", {})
            cfg.runner_command = sandbox.get("command", cfg.runner_command)
            cfg.solver = sandbox.get("solver", cfg.solver)
            cfg.execution_timeout = sandbox.get("timeout", cfg.execution_timeout)
            cfg.parallel = sandbox.get("parallel", cfg.parallel)
            dbg = doc.get("debug", {})
            cfg.debug_attempts = dbg.get("max_attempts", cfg.debug_attempts)
            bench = doc.get("bench", {})
            cfg.repeats = bench.get("repeats", cfg.repeats)
            cfg.rel_tol = bench.get("rel_tol", cfg.rel_tol)
            cfg.check_solution = bench.get("check_solution", cfg.check_solution)
        for name, value in overrides.items():
            if value is not None:
                setattr(cfg, name, value)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.gateway_mode == "replay" and not self.cassette_path:
            raise ConfigError("replay mode requires a cassette path (--cassette)")

    def build_gateway(self) -> Gateway:
        gateway_config = GatewayConfig(
            base_url=self.base_url,
            chat_model=self.chat_model,
            embed_model=self.embed_model,
            api_key=os.environ.get(self.api_key_env),
        )
        return Gateway(
            mode=self.gateway_mode,
            cassette_path=self.cassette_path,
            config=gateway_config,
        )

    def build_engine_config(self) -> EngineConfig:
        return EngineConfig(
            t_max=self.t_max,
            verifier=VerifierConfig(method=self.verifier_method, tau=self.tau),
            freeze_aligned=self.freeze_aligned,
        )

    def build_context(self, *, with_executor: bool = True) -> PipelineContext:
        dialect = load_dialect(self.dialect_path) if self.dialect_path else default_dialect()
        executor = None
        if with_executor:
            client = RunnerClient(
                self.runner_command,
                solver=self.solver,
                default_timeout=self.execution_timeout,
            )
            executor = client.execute
        return PipelineContext(
            gateway=self.build_gateway(),
            prompts=PromptLibrary(),
            dialect=dialect,
            executor=executor,
            execution_timeout=self.execution_timeout,
            debug_max_attempts=self.debug_attempts,
            rel_tol=self.rel_tol,
            check_solution=self.check_solution,
            translate_temperature=self.temperature,
            max_tokens=self.max_tokens,
        )
