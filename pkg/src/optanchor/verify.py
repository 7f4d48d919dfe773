"""Consistency checks between original and reconstructed anchor text.

Two interchangeable strategies: an LLM judge that answers YES/NO through
the fenced answer format, and an embedding check that accepts when the
cosine similarity of the two texts reaches a threshold (inclusive).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .gateway import CompletionRequest, EmbeddingVector, Gateway
from .prompting import ParseError, PromptLibrary, parse_fenced, parse_yes_no

VERIFIER_METHODS = ("llm", "similarity")


class DimensionMismatch(ValueError):
    pass


class ZeroVector(ValueError):
    pass


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """Cosine similarity of two embedding vectors, in [-1, 1] up to rounding."""
    if u.dim != v.dim:
        raise DimensionMismatch(f"dimensions differ: {u.dim} vs {v.dim}")
    a = np.asarray(u.values, dtype=float)
    b = np.asarray(v.values, dtype=float)
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(a @ b) / (norm_a * norm_b)


@dataclass(frozen=True)
class VerifierConfig:
    method: str = "llm"
    tau: float = 0.75

    def __post_init__(self) -> None:
        if self.method not in VERIFIER_METHODS:
            raise ValueError(f"method {self.method!r} not one of {VERIFIER_METHODS}")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")


def verify_prompt(prompts: PromptLibrary, original: str, reconstructed: str) -> str:
    return prompts.render("verify", constraint=original, constraint_new=reconstructed)


@dataclass(frozen=True)
class Verdict:
    """Outcome of one consistency check."""

    aligned: bool
    method: str
    score: float | None = None
    raw: str = ""

    def __post_init__(self) -> None:
        if self.method not in VERIFIER_METHODS:
            raise ValueError(f"method {self.method!r} not one of {VERIFIER_METHODS}")
        if self.method == "similarity" and self.score is None:
            raise ValueError("similarity verdicts must carry a score")
        if self.method == "llm" and self.raw not in ("YES", "NO"):
            raise ValueError(f"llm verdicts must carry raw YES/NO, got {self.raw!r}")


class Verifier:
    """Runs consistency checks over a gateway, caching embeddings per run."""

    def __init__(
        self,
        gateway: Gateway,
        prompts: PromptLibrary | None = None,
        config: VerifierConfig | None = None,
        *,
        max_tokens: int = 64,
    ):
        self.gateway = gateway
        self.prompts = prompts or PromptLibrary()
        self.config = config or VerifierConfig()
        self.max_tokens = max_tokens
        self._cache: dict[str, EmbeddingVector] = {}
        self._cache_lock = threading.Lock()

    def verify(self, original: str, reconstructed: str) -> Verdict:
        if self.config.method == "llm":
            return self.verify_llm(original, reconstructed)
        return self.verify_sim(original, reconstructed, self.config.tau)

    def verify_llm(self, original: str, reconstructed: str) -> Verdict:
        """Judge consistency via the YES/NO prompt.

        A persistent ParseError is a hard error: treating a broken judge
        response as "misaligned" would trigger spurious regeneration.
        """
        if not original or not reconstructed:
            raise ValueError("both descriptions must be non-empty")
        prompt = verify_prompt(self.prompts, original, reconstructed)
        last_error: Exception | None = None
        for attempt in range(2):
            text = self.gateway.complete(
                CompletionRequest(
                    prompt=prompt, temperature=0.0, max_tokens=self.max_tokens, tag="verify"
                )
            )
            try:
                payload = parse_fenced(text, self.prompts.header("verify"))
                aligned = parse_yes_no(payload)
                return Verdict(aligned=aligned, method="llm", raw="YES" if aligned else "NO")
            except ParseError as exc:
                last_error = exc
        raise ParseError(f"verify: {last_error}") from last_error

    def verify_sim(self, original: str, reconstructed: str, tau: float | None = None) -> Verdict:
        if not original or not reconstructed:
            raise ValueError("both descriptions must be non-empty")
        threshold = self.config.tau if tau is None else tau
        if not 0.0 <= threshold <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {threshold}")
        score = cosine(self._embed(original), self._embed(reconstructed))
        return Verdict(
            aligned=score >= threshold,
            method="similarity",
            score=score,
            raw=f"{score:.6f}",
        )

    def _embed(self, text: str) -> EmbeddingVector:
        with self._cache_lock:
            cached = self._cache.get(text)
        if cached is not None:
            return cached
        vector = self.gateway.embed(text)
        with self._cache_lock:
            self._cache[text] = vector
        return vector
