"""Structured data to code: deterministic templates plus agent translation.

Parameters and variables are fully specified, so they render through fixed
per-dialect templates (``render_simple``). Constraints and the objective
carry the modeling logic, so each one is translated by an agent call from
its natural-language sentence, one call per anchor so that later correction
can regenerate a single anchor without touching the rest.
"""

from __future__ import annotations

import ast
import builtins
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .gateway import CompletionRequest, Gateway
from .prompting import ParseError, PromptLibrary, parse_fenced
from .schema import (
    Anchor,
    ProblemInstance,
    SchemaError,
    StructuredData,
    parse_structured_data,
)

_FIELD_RE = re.compile(r"\{([a-z_]+)\}")

DIALECT_TEMPLATE_FIELDS = (
    "scalar_param_template",
    "array_param_template",
    "variable_template",
    "boilerplate_header",
    "boilerplate_footer",
)


@dataclass(frozen=True)
class TargetDialect:
    """Rendering templates and boilerplate for one modeling runtime.

    The footer must emit the result contract file (status, objective,
    solution as JSON at the path named by the ``OPT_RESULT_PATH``
    environment variable); the packaged default does so through the
    runtime's ``write_result`` helper.
    """

    name: str
    scalar_param_template: str
    array_param_template: str
    variable_template: str
    boilerplate_header: str
    boilerplate_footer: str
    keywords: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for fieldname in DIALECT_TEMPLATE_FIELDS:
            if not getattr(self, fieldname):
                raise ValueError(f"dialect {self.name!r}: {fieldname} must be non-empty")


def _fill(template: str, **bindings: str) -> str:
    return _FIELD_RE.sub(lambda m: bindings.get(m.group(1), m.group(0)), template)


def load_dialect(path: str | Path) -> TargetDialect:
    doc = json.loads(Path(path).read_text())
    return _dialect_from_doc(doc)


def default_dialect() -> TargetDialect:
    doc = json.loads(resources.files("optanchor").joinpath("dialects/default.json").read_text())
    return _dialect_from_doc(doc)


def _dialect_from_doc(doc: dict) -> TargetDialect:
    return TargetDialect(
        name=doc["name"],
        scalar_param_template=doc["scalar_param_template"],
        array_param_template=doc["array_param_template"],
        variable_template=doc["variable_template"],
        boilerplate_header=doc["boilerplate_header"],
        boilerplate_footer=doc["boilerplate_footer"],
        keywords=tuple(doc.get("keywords", ())),
    )


def render_simple(s: StructuredData, dialect: TargetDialect) -> list[tuple[str, str]]:
    """Render parameter and variable declarations, in declaration order.

    Pure: equal inputs give byte-equal outputs.
    """
    fragments: list[tuple[str, str]] = []
    for p in s.parameters:
        if p.is_scalar:
            code = _fill(dialect.scalar_param_template, symbol=p.symbol)
        else:
            code = _fill(
                dialect.array_param_template,
                symbol=p.symbol,
                shape_comment=str(list(p.shape)),
            )
        fragments.append((p.symbol, code))
    for v in s.variables:
        code = _fill(
            dialect.variable_template,
            symbol=v.symbol,
            shape=", ".join(v.shape),
            vtype=v.var_type,
        )
        fragments.append((v.symbol, code))
    return fragments


def parameter_listing(s: StructuredData) -> str:
    if not s.parameters:
        return "(none)"
    lines = []
    for p in s.parameters:
        shape = "scalar" if p.is_scalar else f"shape: {list(p.shape)}"
        lines.append(f"- {p.symbol} ({shape}): {p.definition}")
    return "\n".join(lines)


def variable_listing(s: StructuredData) -> str:
    if not s.variables:
        return "(none)"
    lines = []
    for v in s.variables:
        shape = "scalar" if not v.shape else f"shape: {list(v.shape)}"
        lines.append(f"- {v.symbol} ({shape}, type: {v.var_type}): {v.definition}")
    return "\n".join(lines)


def extract_prompt(prompts: PromptLibrary, problem: ProblemInstance) -> str:
    return prompts.render("extract", description=problem.description)


def translate_prompt(
    prompts: PromptLibrary,
    anchor: Anchor,
    context: StructuredData,
    dialect: TargetDialect,
) -> str:
    return prompts.render(
        "translate",
        description=context.source_problem.description,
        solver=dialect.name,
        constraint=anchor.description,
        params=parameter_listing(context),
        vars=variable_listing(context),
    )


def undeclared_identifiers(
    fragment: str,
    context: StructuredData,
    dialect: TargetDialect,
) -> set[str]:
    """Names a fragment reads without any declaration to back them.

    Declared means: a parameter or variable symbol, a dialect keyword, a
    Python builtin, or a name the fragment itself assigns (loop targets,
    comprehension variables, local assignments).
    """
    tree = ast.parse(fragment)
    loaded: set[str] = set()
    stored: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Name):
            if isinstance(node.ctx, ast.Load):
                loaded.add(node.id)
            else:
                stored.add(node.id)
    declared = context.symbols() | set(dialect.keywords) | set(dir(builtins))
    return loaded - stored - declared


class Translator:
    """The extract and translate stages, over a gateway and prompt library."""

    def __init__(
        self,
        gateway: Gateway,
        prompts: PromptLibrary | None = None,
        *,
        temperature: float = 0.2,
        max_tokens: int = 4096,
    ):
        self.gateway = gateway
        self.prompts = prompts or PromptLibrary()
        self.temperature = temperature
        self.max_tokens = max_tokens

    def _complete(self, tag: str, prompt: str) -> str:
        return self.gateway.complete(
            CompletionRequest(
                prompt=prompt,
                temperature=self.temperature,
                max_tokens=self.max_tokens,
                tag=tag,
            )
        )

    def extract(self, problem: ProblemInstance) -> StructuredData:
        """Prose to structured data. One re-prompt on malformed output."""
        if not problem.description:
            raise ValueError("problem description must be non-empty")
        prompt = extract_prompt(self.prompts, problem)
        last_error: Exception | None = None
        for attempt in range(2):
            text = self._complete("extract", prompt)
            try:
                payload = parse_fenced(text, self.prompts.header("extract"))
                structured = parse_structured_data(payload, problem)
                break
            except (ParseError, json.JSONDecodeError, SchemaError) as exc:
                last_error = exc
        else:
            if isinstance(last_error, ParseError):
                raise ParseError(f"extract: {last_error}") from last_error
            raise SchemaError(f"extract: {last_error}") from last_error
        for anchor in structured.anchors:
            anchor.code = None
            anchor.error_flag = ""
            anchor.status = "unchecked"
        return structured

    def translate_anchor(
        self, anchor: Anchor, context: StructuredData, dialect: TargetDialect
    ) -> str:
        """One anchor sentence to one code fragment. One re-prompt on ParseError."""
        if not anchor.description:
            raise ValueError("anchor description must be non-empty")
        prompt = translate_prompt(self.prompts, anchor, context, dialect)
        last_error: Exception | None = None
        for attempt in range(2):
            text = self._complete("translate", prompt)
            try:
                return parse_fenced(text, self.prompts.header("translate"))
            except ParseError as exc:
                last_error = exc
        raise ParseError(f"translate anchor {anchor.anchor_id}: {last_error}") from last_error
