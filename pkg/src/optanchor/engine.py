"""The iterative correction loop over semantic anchors.

The loop translates every anchor once, then repeatedly (up to ``t_max``
times) reconstructs a fresh description from each anchor's current code,
verifies it against the original description, collects the misaligned
anchors into an error set, and regenerates exactly those anchors. It stops
early as soon as the error set is empty; exhausting the iteration budget is
not an error - the best current model is returned and the trace records the
residual error count.

With ``freeze_aligned`` (the default), an anchor that has verified aligned
is never reconstructed or re-verified again, which makes the error-set
sizes non-increasing and saves agent calls. Setting it to False
re-derives and re-checks every anchor each iteration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .gateway import CompletionRequest, Gateway, ReplayMiss, TransportError
from .prompting import ParseError, PromptLibrary, parse_fenced
from .schema import (
    Anchor,
    CandidateModel,
    SchemaError,
    StructuredData,
    semantic_anchors,
)
from .translate import (
    TargetDialect,
    Translator,
    parameter_listing,
    render_simple,
    variable_listing,
)
from .verify import Verifier, VerifierConfig

ANCHOR_EVENTS = ("translated", "reconstructed", "verified", "regenerated")


class StageError(RuntimeError):
    """A pipeline stage failed; carries iteration and anchor context."""

    def __init__(self, stage: str, iteration: int, anchor_id: int | None, cause: Exception):
        self.stage = stage
        self.iteration = iteration
        self.anchor_id = anchor_id
        self.cause = cause
        where = f"t={iteration}" + (f" anchor={anchor_id}" if anchor_id is not None else "")
        super().__init__(f"{stage} failed ({where}): {cause}")


@dataclass(frozen=True)
class EngineConfig:
    t_max: int = 5
    verifier: VerifierConfig = field(default_factory=VerifierConfig)
    freeze_aligned: bool = True

    def __post_init__(self) -> None:
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")


@dataclass
class RunTrace:
    """Everything the bench needs to account for one engine run.

    ``error_set_sizes[k]`` is the misaligned-anchor count observed at
    correction iteration k+1. ``anchor_events`` is an append-only list of
    (iteration, anchor_id, event, detail) tuples; iteration 0 holds the
    initial translations.
    """

    error_set_sizes: list[int] = field(default_factory=list)
    anchor_events: list[tuple[int, int, str, str]] = field(default_factory=list)
    corrections_total: int = 0
    wall_times: dict[str, float] = field(default_factory=dict)

    def record(self, iteration: int, anchor_id: int, event: str, detail: str = "") -> None:
        self.anchor_events.append((iteration, anchor_id, event, detail))

    def add_time(self, stage: str, seconds: float) -> None:
        self.wall_times[stage] = self.wall_times.get(stage, 0.0) + seconds

    @property
    def iterations(self) -> int:
        return len(self.error_set_sizes)

    @property
    def residual_errors(self) -> int:
        return self.error_set_sizes[-1] if self.error_set_sizes else 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "error_set_sizes": list(self.error_set_sizes),
            "anchor_events": [list(e) for e in self.anchor_events],
            "corrections_total": self.corrections_total,
            "wall_times": dict(self.wall_times),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> RunTrace:
        return cls(
            error_set_sizes=[int(n) for n in doc.get("error_set_sizes", [])],
            anchor_events=[
                (int(t), int(aid), str(event), str(detail))
                for t, aid, event, detail in doc.get("anchor_events", [])
            ],
            corrections_total=int(doc.get("corrections_total", 0)),
            wall_times={str(k): float(v) for k, v in doc.get("wall_times", {}).items()},
        )

    def write(self, path: str | Path) -> None:
        import json

        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> RunTrace:
        import json

        return cls.from_dict(json.loads(Path(path).read_text()))


AGENT_FAILURES = (ParseError, TransportError, ReplayMiss, SchemaError)


def reconstruct_prompt(
    prompts: PromptLibrary,
    anchor: Anchor,
    context: StructuredData,
    dialect: TargetDialect,
) -> str:
    return prompts.render(
        "reconstruct",
        description=context.source_problem.description,
        solver=dialect.name,
        constraint=anchor.description,
        constraint_code=anchor.code or "",
        params=parameter_listing(context),
        vars=variable_listing(context),
    )


class CorrectionEngine:
    """Runs the correction loop for one problem at a time."""

    def __init__(
        self,
        gateway: Gateway,
        prompts: PromptLibrary | None = None,
        *,
        translate_temperature: float = 0.2,
        max_tokens: int = 4096,
    ):
        self.gateway = gateway
        self.prompts = prompts or PromptLibrary()
        self.translator = Translator(
            gateway, self.prompts, temperature=translate_temperature, max_tokens=max_tokens
        )
        self.max_tokens = max_tokens

    def reconstruct_anchor(
        self, anchor: Anchor, context: StructuredData, dialect: TargetDialect
    ) -> str:
        """A fresh description of what the anchor's code actually does."""
        if anchor.code is None:
            raise ValueError(f"anchor {anchor.anchor_id} has no code to reconstruct from")
        prompt = reconstruct_prompt(self.prompts, anchor, context, dialect)
        last_error: Exception | None = None
        for attempt in range(2):
            text = self.gateway.complete(
                CompletionRequest(
                    prompt=prompt, temperature=0.0, max_tokens=self.max_tokens, tag="reconstruct"
                )
            )
            try:
                return parse_fenced(text, self.prompts.header("reconstruct"))
            except ParseError as exc:
                last_error = exc
        raise ParseError(f"reconstruct anchor {anchor.anchor_id}: {last_error}") from last_error

    def run(
        self, s: StructuredData, dialect: TargetDialect, cfg: EngineConfig | None = None
    ) -> tuple[CandidateModel, RunTrace]:
        cfg = cfg or EngineConfig()
        verifier = Verifier(self.gateway, self.prompts, cfg.verifier)
        trace = RunTrace()
        anchors = semantic_anchors(s)
        started = time.perf_counter()

        # Initial generation: every anchor gets its first fragment.
        t0 = time.perf_counter()
        for anchor in anchors:
            code = self._guard(
                "translate", 0, anchor, lambda: self.translator.translate_anchor(anchor, s, dialect)
            )
            anchor.code = code
            anchor.record(0, "translated", code)
            trace.record(0, anchor.anchor_id, "translated")
        trace.add_time("translate", time.perf_counter() - t0)

        for t in range(1, cfg.t_max + 1):
            if cfg.freeze_aligned:
                candidates = [a for a in anchors if a.status != "aligned"]
            else:
                candidates = list(anchors)

            t0 = time.perf_counter()
            for anchor in candidates:
                recon = self._guard(
                    "reconstruct", t, anchor, lambda: self.reconstruct_anchor(anchor, s, dialect)
                )
                anchor.reconstructed = recon
                anchor.record(t, "reconstructed", recon)
                trace.record(t, anchor.anchor_id, "reconstructed")
            trace.add_time("reconstruct", time.perf_counter() - t0)

            t0 = time.perf_counter()
            error_set: list[Anchor] = []
            for anchor in candidates:
                verdict = self._guard(
                    "verify", t, anchor, lambda: verifier.verify(anchor.description, anchor.reconstructed)
                )
                anchor.apply_verdict(verdict.aligned)
                detail = f"{verdict.method} {'aligned' if verdict.aligned else 'misaligned'}"
                if verdict.score is not None:
                    detail += f" score={verdict.score:.6f}"
                anchor.record(t, "verified", detail)
                trace.record(t, anchor.anchor_id, "verified", detail)
                if not verdict.aligned:
                    error_set.append(anchor)
            trace.add_time("verify", time.perf_counter() - t0)

            trace.error_set_sizes.append(len(error_set))
            if not error_set:
                break

            t0 = time.perf_counter()
            for anchor in error_set:
                code = self._guard(
                    "translate", t, anchor, lambda: self.translator.translate_anchor(anchor, s, dialect)
                )
                anchor.code = code
                anchor.record(t, "regenerated", code)
                trace.record(t, anchor.anchor_id, "regenerated")
                trace.corrections_total += 1
            trace.add_time("regenerate", time.perf_counter() - t0)

        trace.add_time("total", time.perf_counter() - started)
        model = CandidateModel(
            simp_fragments=tuple(render_simple(s, dialect)),
            sem_fragments={a.anchor_id: a.code for a in anchors},
            dialect=dialect,
        )
        return model, trace

    @staticmethod
    def _guard(stage: str, iteration: int, anchor: Anchor | None, call: Any) -> Any:
        try:
            return call()
        except AGENT_FAILURES as exc:
            raise StageError(
                stage, iteration, anchor.anchor_id if anchor is not None else None, exc
            ) from exc
