"""Prompt templates and fenced-output parsing.

Templates are plain-text files under ``prompts/<stage>.txt`` using
``{placeholder}`` syntax. Rendering is a single-pass verbatim substitution:
bound text is never escaped and cannot itself be re-substituted.

Agent responses use fenced sections:

    HEADER:
    =====
    payload
    =====

``parse_fenced`` extracts the first such section after the header and
tolerates prose before the header and junk after the closing fence, but a
missing fence is always an error, never a silent empty payload.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")

# Placeholders each stage's template must contain.
STAGE_PLACEHOLDERS: dict[str, frozenset[str]] = {
    "extract": frozenset({"description"}),
    "translate": frozenset({"description", "solver", "constraint", "params", "vars"}),
    "reconstruct": frozenset(
        {"description", "solver", "constraint", "constraint_code", "params", "vars"}
    ),
    "verify": frozenset({"constraint", "constraint_new"}),
    "debug": frozenset({"description", "program", "error"}),
}

# Header of the fenced output section each stage's response must contain.
STAGE_HEADERS: dict[str, str] = {
    "extract": "STRUCTURED_DATA:",
    "translate": "CODE:",
    "reconstruct": "CONSTRAINT:",
    "verify": "ANSWER:",
    "debug": "CODE:",
}


class MissingBinding(KeyError):
    """A required placeholder was not bound at render time."""

    def __init__(self, placeholder: str):
        super().__init__(placeholder)
        self.placeholder = placeholder


class ParseError(ValueError):
    """An agent response does not follow the requested output format."""


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str
    required_placeholders: frozenset[str]

    def __post_init__(self) -> None:
        present = set(PLACEHOLDER_RE.findall(self.body))
        missing = self.required_placeholders - present
        if missing:
            raise ValueError(
                f"template {self.name!r} body lacks required placeholders {sorted(missing)}"
            )


def render(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Substitute placeholders verbatim; raises MissingBinding when short."""
    for name in sorted(template.required_placeholders):
        if name not in bindings:
            raise MissingBinding(name)

    def substitute(match: re.Match[str]) -> str:
        name = match.group(1)
        if name in bindings:
            return str(bindings[name])
        return match.group(0)

    return PLACEHOLDER_RE.sub(substitute, template.body)


def _is_fence(line: str) -> bool:
    stripped = line.strip()
    return len(stripped) >= 3 and set(stripped) == {"="}


def parse_fenced(response: str, header: str) -> str:
    """Payload of the first fenced section following ``header``."""
    lines = response.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    start = None
    for i, line in enumerate(lines):
        if line.strip() == header:
            start = i
            break
    if start is None:
        raise ParseError(f"response has no {header!r} header")
    opening = None
    for i in range(start + 1, len(lines)):
        if _is_fence(lines[i]):
            opening = i
            break
    if opening is None:
        raise ParseError(f"no opening fence after {header!r}")
    closing = None
    for i in range(opening + 1, len(lines)):
        if _is_fence(lines[i]):
            closing = i
            break
    if closing is None:
        raise ParseError(f"no closing fence after {header!r}")
    return "\n".join(lines[opening + 1 : closing]).strip()


def parse_yes_no(payload: str) -> bool:
    """Map a judge payload to a boolean; uppercase YES/NO only."""
    token = payload.strip()
    if token == "YES":
        return True
    if token == "NO":
        return False
    raise ParseError(f"expected YES or NO, got {token!r}")


class PromptLibrary:
    """Loads and renders the five stage templates.

    With no directory argument the packaged templates are used. A custom
    directory must provide all five ``<stage>.txt`` files.
    """

    def __init__(self, directory: str | Path | None = None):
        self._templates: dict[str, PromptTemplate] = {}
        for stage, required in STAGE_PLACEHOLDERS.items():
            if directory is None:
                body = (
                    resources.files("optanchor").joinpath(f"prompts/{stage}.txt").read_text()
                )
            else:
                body = (Path(directory) / f"{stage}.txt").read_text()
            self._templates[stage] = PromptTemplate(
                name=stage, body=body, required_placeholders=required
            )

    def get(self, stage: str) -> PromptTemplate:
        return self._templates[stage]

    def render(self, stage: str, **bindings: str) -> str:
        return render(self._templates[stage], bindings)

    def header(self, stage: str) -> str:
        return STAGE_HEADERS[stage]
