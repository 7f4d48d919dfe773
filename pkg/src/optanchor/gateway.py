"""Chat-completion and embedding access with deterministic record/replay.

Every agent call goes through a :class:`Gateway`, which runs in one of three
modes:

    live    call the configured provider, nothing persisted
    record  call the provider and append (fingerprint, response) to a cassette
    replay  serve responses from the cassette only; no network is touched

Requests are matched by a fingerprint of (tag, normalized prompt), so edits
to prompt text invalidate fixtures while sampling parameters do not. A
fingerprint may have several recorded responses: replay serves them in
order and then sticks on the last one. This is what lets a regeneration
request - byte-identical to the original translation request - produce
different code on a later iteration.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

COMPLETION_TAGS = ("extract", "translate", "reconstruct", "verify", "debug")
EMBED_TAG = "embed"
GATEWAY_MODES = ("live", "record", "replay")


class TransportError(RuntimeError):
    """Provider or network failure that survived the retry policy."""


class ReplayMiss(LookupError):
    """Replay mode was asked for a fingerprint the cassette does not contain.

    Usually means a prompt template or pipeline input drifted since the
    cassette was recorded.
    """


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 4096
    tag: str = "translate"

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.tag not in COMPLETION_TAGS:
            raise ValueError(f"tag {self.tag!r} not one of {COMPLETION_TAGS}")


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dim: int

    def __post_init__(self) -> None:
        if len(self.values) != self.dim:
            raise ValueError(f"vector has {len(self.values)} values but dim={self.dim}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding values must be finite")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> EmbeddingVector:
        vals = tuple(float(v) for v in values)
        return cls(values=vals, dim=len(vals))


def normalize_prompt(text: str) -> str:
    """Normalize line endings and trailing whitespace, nothing else."""
    unified = text.replace("\r\n", "\n").replace("\r", "\n")
    return "\n".join(line.rstrip() for line in unified.split("\n")).rstrip("\n")


def fingerprint(tag: str, prompt: str) -> str:
    digest = hashlib.sha256()
    digest.update(tag.encode("utf-8"))
    digest.update(b"\n")
    digest.update(normalize_prompt(prompt).encode("utf-8"))
    return digest.hexdigest()


def _prompt_sha(prompt: str) -> str:
    return hashlib.sha256(normalize_prompt(prompt).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CassetteEntry:
    fingerprint: str
    tag: str
    prompt_sha: str
    response: str | tuple[float, ...]

    def to_json(self) -> str:
        response: Any = self.response
        if isinstance(response, tuple):
            response = list(response)
        return json.dumps(
            {
                "fingerprint": self.fingerprint,
                "tag": self.tag,
                "prompt_sha": self.prompt_sha,
                "response": response,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> CassetteEntry:
        doc = json.loads(line)
        response = doc["response"]
        if isinstance(response, list):
            response = tuple(float(v) for v in response)
        return cls(
            fingerprint=doc["fingerprint"],
            tag=doc["tag"],
            prompt_sha=doc["prompt_sha"],
            response=response,
        )


@dataclass
class Cassette:
    """An ordered log of recorded interactions, JSON-lines on disk."""

    entries: list[CassetteEntry] = field(default_factory=list)
    mode: str = "replay"

    def __post_init__(self) -> None:
        if self.mode not in GATEWAY_MODES:
            raise ValueError(f"mode {self.mode!r} not one of {GATEWAY_MODES}")

    def add(self, tag: str, prompt: str, response: str | Sequence[float]) -> CassetteEntry:
        if not isinstance(response, str):
            response = tuple(float(v) for v in response)
        entry = CassetteEntry(
            fingerprint=fingerprint(tag, prompt),
            tag=tag,
            prompt_sha=_prompt_sha(prompt),
            response=response,
        )
        self.entries.append(entry)
        return entry

    def index(self) -> dict[str, list[CassetteEntry]]:
        by_fp: dict[str, list[CassetteEntry]] = {}
        for entry in self.entries:
            by_fp.setdefault(entry.fingerprint, []).append(entry)
        return by_fp

    @classmethod
    def load(cls, path: str | Path, mode: str = "replay") -> Cassette:
        entries = []
        for line in Path(path).read_text().splitlines():
            if line.strip():
                entries.append(CassetteEntry.from_json(line))
        return cls(entries=entries, mode=mode)

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(e.to_json() + "\n" for e in self.entries))


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = "http://localhost:8000/v1"
    chat_model: str = "gpt-4o"
    embed_model: str = "all-MiniLM-L6-v2"
    api_key: str | None = None
    timeout: float = 120.0
    retries: int = 3
    backoff_base: float = 0.5


class HttpTransport:
    """OpenAI-compatible chat and embedding endpoints over httpx."""

    def __init__(self, config: GatewayConfig):
        self._config = config

    def _post(self, route: str, payload: dict[str, Any]) -> dict[str, Any]:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self._config.api_key:
            headers["Authorization"] = f"Bearer {self._config.api_key}"
        url = self._config.base_url.rstrip("/") + route
        try:
            response = httpx.post(url, json=payload, headers=headers, timeout=self._config.timeout)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise TransportError(f"{url}: {exc}") from exc
        return response.json()

    def complete(self, request: CompletionRequest) -> str:
        doc = self._post(
            "/chat/completions",
            {
                "model": self._config.chat_model,
                "messages": [{"role": "user", "content": request.prompt}],
                "temperature": request.temperature,
                "max_tokens": request.max_tokens,
            },
        )
        try:
            return doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {doc!r}") from exc

    def embed(self, text: str) -> list[float]:
        doc = self._post(
            "/embeddings",
            {"model": self._config.embed_model, "input": [text]},
        )
        try:
            return [float(v) for v in doc["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed embedding response: {doc!r}") from exc


class Gateway:
    """Mode-aware front door for completions and embeddings.

    Safe for concurrent use: replay reads never mutate shared state beyond
    per-session cursors, and record appends are serialized by a lock.
    """

    def __init__(
        self,
        mode: str = "replay",
        cassette: Cassette | None = None,
        cassette_path: str | Path | None = None,
        transport: Any = None,
        config: GatewayConfig | None = None,
        sleep: Any = time.sleep,
    ):
        if mode not in GATEWAY_MODES:
            raise ValueError(f"mode {mode!r} not one of {GATEWAY_MODES}")
        self.mode = mode
        self.config = config or GatewayConfig()
        self._cassette_path = Path(cassette_path) if cassette_path else None
        self._sleep = sleep
        if cassette is not None:
            self.cassette = cassette
        elif self._cassette_path is not None and mode == "replay":
            self.cassette = Cassette.load(self._cassette_path, mode=mode)
        elif mode != "live":
            self.cassette = Cassette(mode=mode)
        else:
            self.cassette = None
        if mode == "replay":
            self._transport = None
            if self.cassette is None:
                raise ValueError("replay mode requires a cassette")
        else:
            self._transport = transport if transport is not None else HttpTransport(self.config)
        self._lock = threading.Lock()
        self._index = self.cassette.index() if self.cassette is not None else {}
        self._cursors: dict[str, int] = {}

    def session(self) -> Gateway:
        """A view with fresh replay cursors over the same cassette.

        Each independent pipeline run should use its own session so that
        multi-response fingerprints replay from the start and concurrent
        runs cannot interleave each other's cursors.
        """
        clone = object.__new__(Gateway)
        clone.__dict__.update(self.__dict__)
        clone._lock = threading.Lock()
        clone._cursors = {}
        return clone

    # -- replay ------------------------------------------------------------

    def _replay(self, tag: str, prompt: str) -> str | tuple[float, ...]:
        fp = fingerprint(tag, prompt)
        queue = self._index.get(fp)
        if not queue:
            raise ReplayMiss(f"no recorded response for tag={tag} fingerprint={fp[:12]}")
        with self._lock:
            cursor = self._cursors.get(fp, 0)
            self._cursors[fp] = cursor + 1
        return queue[min(cursor, len(queue) - 1)].response

    # -- live --------------------------------------------------------------

    def _with_retries(self, call: Any) -> Any:
        last: Exception | None = None
        for attempt in range(self.config.retries):
            try:
                return call()
            except TransportError as exc:
                last = exc
                if attempt + 1 < self.config.retries:
                    self._sleep(self.config.backoff_base * (2**attempt))
        raise TransportError(f"gave up after {self.config.retries} attempts: {last}")

    def _record(self, tag: str, prompt: str, response: str | Sequence[float]) -> None:
        with self._lock:
            entry = self.cassette.add(tag, prompt, response)
            if self._cassette_path is not None:
                with self._cassette_path.open("a") as fh:
                    fh.write(entry.to_json() + "\n")

    # -- public API ----------------------------------------------------------

    def complete(self, request: CompletionRequest) -> str:
        if self.mode == "replay":
            response = self._replay(request.tag, request.prompt)
            if not isinstance(response, str):
                raise ReplayMiss(f"recorded response for tag={request.tag} is not text")
            return response
        text = self._with_retries(lambda: self._transport.complete(request))
        if self.mode == "record":
            self._record(request.tag, request.prompt, text)
        return text

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise ValueError("cannot embed empty text")
        if self.mode == "replay":
            response = self._replay(EMBED_TAG, text)
            if isinstance(response, str):
                raise ReplayMiss("recorded response for embed request is not a vector")
            return EmbeddingVector.from_values(response)
        values = self._with_retries(lambda: self._transport.embed(text))
        if self.mode == "record":
            self._record(EMBED_TAG, text, values)
        return EmbeddingVector.from_values(values)
