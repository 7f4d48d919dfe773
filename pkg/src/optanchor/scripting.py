"""Author replay cassettes without a live provider.

A scripted cassette is built from the same prompt constructions the
pipeline uses, so fingerprints always match at replay time. The central
idea: describe each anchor as a sequence of rounds (code, reconstruction,
verdict), and the script emits the matching translate/reconstruct/verify
entries. Because replay matches by fingerprint, the script does not need
to know how the engine interleaves calls across anchors.

Used by the test suite and the demo scripts; equally handy for building
offline fixtures for new problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .engine import reconstruct_prompt
from .gateway import Cassette, EMBED_TAG
from .prompting import STAGE_HEADERS, PromptLibrary
from .schema import Anchor, ProblemInstance, StructuredData, parse_structured_data
from .translate import TargetDialect, default_dialect, extract_prompt, translate_prompt
from .verify import verify_prompt

# Orthogonal unit vectors: cosine 1.0 for matching texts, 0.0 otherwise.
ALIGNED_VECTOR = (1.0, 0.0)
MISALIGNED_VECTOR = (0.0, 1.0)


@dataclass(frozen=True)
class AnchorRound:
    """One translate/reconstruct/verify cycle for a single anchor.

    ``aligned=None`` scripts the translation only (no reconstruction or
    verdict), which is what a never-verified final regeneration looks like.
    """

    code: str
    reconstruction: str | None = None
    aligned: bool | None = None


class CassetteScript:
    """Accumulates scripted responses into a replayable cassette."""

    def __init__(
        self,
        prompts: PromptLibrary | None = None,
        dialect: TargetDialect | None = None,
        verifier_method: str = "llm",
    ):
        self.prompts = prompts or PromptLibrary()
        self.dialect = dialect or default_dialect()
        self.verifier_method = verifier_method
        self.cassette = Cassette(mode="replay")

    # -- low-level -----------------------------------------------------------

    def add_completion(self, tag: str, prompt: str, response: str) -> None:
        self.cassette.add(tag, prompt, response)

    def add_embedding(self, text: str, vector: Sequence[float]) -> None:
        self.cassette.add(EMBED_TAG, text, vector)

    def fenced(self, stage: str, payload: str) -> str:
        header = STAGE_HEADERS[stage]
        return f"{header}\n=====\n{payload}\n====="

    # -- stage-level -----------------------------------------------------------

    def script_extract(self, problem: ProblemInstance, structured_json: str) -> StructuredData:
        """Script the extract response; returns the parsed document."""
        prompt = extract_prompt(self.prompts, problem)
        self.add_completion("extract", prompt, self.fenced("extract", structured_json))
        return parse_structured_data(structured_json, problem)

    def script_anchor(
        self,
        context: StructuredData,
        anchor: Anchor,
        rounds: Sequence[AnchorRound],
    ) -> None:
        """Script the full per-anchor conversation, one entry per round."""
        prompt = translate_prompt(self.prompts, anchor, context, self.dialect)
        for round_ in rounds:
            self.add_completion("translate", prompt, self.fenced("translate", round_.code))
            if round_.reconstruction is None:
                continue
            probe = Anchor(
                anchor_id=anchor.anchor_id,
                kind=anchor.kind,
                description=anchor.description,
                code=round_.code,
            )
            r_prompt = reconstruct_prompt(self.prompts, probe, context, self.dialect)
            self.add_completion(
                "reconstruct", r_prompt, self.fenced("reconstruct", round_.reconstruction)
            )
            if round_.aligned is None:
                continue
            if self.verifier_method == "llm":
                v_prompt = verify_prompt(self.prompts, anchor.description, round_.reconstruction)
                self.add_completion(
                    "verify", v_prompt, self.fenced("verify", "YES" if round_.aligned else "NO")
                )
            else:
                self.add_embedding(anchor.description, ALIGNED_VECTOR)
                self.add_embedding(
                    round_.reconstruction,
                    ALIGNED_VECTOR if round_.aligned else MISALIGNED_VECTOR,
                )

    def script_solve(
        self,
        problem: ProblemInstance,
        structured_json: str,
        plans: dict[int, Sequence[AnchorRound]],
    ) -> StructuredData:
        """Script extract plus every anchor's rounds in one call.

        ``plans`` maps anchor id to its rounds; every anchor in the
        structured document must have a plan.
        """
        context = self.script_extract(problem, structured_json)
        for anchor in context.anchors:
            if anchor.anchor_id not in plans:
                raise KeyError(f"no scripted rounds for anchor {anchor.anchor_id}")
            self.script_anchor(context, anchor, plans[anchor.anchor_id])
        return context

    def script_debug(
        self,
        problem: ProblemInstance,
        broken_source: str,
        error_text: str,
        fixed_source: str,
    ) -> None:
        prompt = self.prompts.render(
            "debug",
            description=problem.description,
            program=broken_source,
            error=error_text,
        )
        self.add_completion("debug", prompt, self.fenced("debug", fixed_source))

    def save(self, path: str | Path) -> None:
        self.cassette.save(path)
