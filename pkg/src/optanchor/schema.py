"""Structured problem model: parameters, variables, and semantic anchors.

A problem arrives as free-form prose plus a flat JSON data file. The extract
stage turns the prose into a structured document with four blocks:

    parameters   list of {definition, symbol, value, shape, code}
    constraints  list of {description, code, error}
    variables    object keyed by symbol: {shape, type, definition}
    objective    {description, code, error}

Parameters and variables are the "simple" half (renderable from templates);
the constraints and the objective are the semantic anchors that drive the
correction loop. This module owns the JSON wire format, validation, and the
in-memory types everything downstream consumes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .translate import TargetDialect

SYMBOL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")

VAR_TYPES = ("continuous", "integer", "binary")
ERROR_FLAGS = ("", "YES", "NO")
ANCHOR_STATUSES = ("unchecked", "aligned", "misaligned")
ANCHOR_KINDS = ("constraint", "objective")


class SchemaError(ValueError):
    """Structured-data JSON violates the schema contract.

    Raised for missing required fields, duplicate symbols, and shape entries
    that do not resolve to a scalar parameter. Signals that the extraction
    output must be retried or rejected.
    """


def _require_symbol(symbol: str, context: str) -> None:
    if not isinstance(symbol, str) or not SYMBOL_RE.match(symbol):
        raise SchemaError(f"{context}: {symbol!r} is not a legal symbol")


@dataclass(frozen=True)
class ProblemInstance:
    """One benchmark problem: prose description plus its runtime data."""

    id: str
    description: str
    data: dict[str, Any] = field(default_factory=dict)
    ground_truth_objective: float | None = None
    ground_truth_solution: dict[str, Any] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("problem id must be non-empty")
        if not self.description:
            raise ValueError("problem description must be non-empty")
        for key in self.data:
            if not isinstance(key, str) or not SYMBOL_RE.match(key):
                raise ValueError(f"data key {key!r} is not a legal symbol")


@dataclass(frozen=True)
class Parameter:
    """A named problem constant, populated at run time from the data file.

    ``value`` is retained verbatim from the source document but rendering
    never uses it: the data file is authoritative. ``shape`` lists the
    symbols of the scalar parameters sizing each dimension; empty = scalar.
    """

    definition: str
    symbol: str
    value: str = ""
    shape: tuple[str, ...] = ()
    code: str = ""

    def __post_init__(self) -> None:
        _require_symbol(self.symbol, "parameter")

    @property
    def is_scalar(self) -> bool:
        return not self.shape


@dataclass(frozen=True)
class VariableDecl:
    """A decision variable declaration."""

    symbol: str
    shape: tuple[str, ...] = ()
    var_type: str = "continuous"
    definition: str = ""

    def __post_init__(self) -> None:
        _require_symbol(self.symbol, "variable")
        if self.var_type not in VAR_TYPES:
            raise SchemaError(
                f"variable {self.symbol}: type {self.var_type!r} not one of {VAR_TYPES}"
            )


@dataclass
class Anchor:
    """One constraint or the objective, tracked through the correction loop.

    ``description`` is the original anchor text and never changes. ``code``
    is the current generated fragment; ``reconstructed`` the latest
    description re-derived from that code. ``error_flag`` is the serialized
    verdict ("" unchecked, "YES" misaligned, "NO" aligned); ``status``
    mirrors the most recent verdict. ``history`` is an append-only audit
    log of (iteration, event, payload) and is excluded from equality.
    """

    anchor_id: int
    kind: str
    description: str
    code: str | None = None
    reconstructed: str | None = None
    error_flag: str = ""
    status: str = "unchecked"
    history: list[tuple[int, str, str]] = field(default_factory=list, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ANCHOR_KINDS:
            raise ValueError(f"anchor kind {self.kind!r} not one of {ANCHOR_KINDS}")
        if not self.description:
            raise ValueError("anchor description must be non-empty")
        if self.error_flag not in ERROR_FLAGS:
            raise ValueError(f"anchor error flag {self.error_flag!r} not one of {ERROR_FLAGS}")
        if self.status not in ANCHOR_STATUSES:
            raise ValueError(f"anchor status {self.status!r} not one of {ANCHOR_STATUSES}")
        if self.code is None and self.status != "unchecked":
            raise ValueError("anchor without code must have status 'unchecked'")

    def record(self, iteration: int, event: str, payload: str = "") -> None:
        self.history.append((iteration, event, payload))

    def apply_verdict(self, aligned: bool) -> None:
        """Update status and error flag from a verification outcome."""
        self.status = "aligned" if aligned else "misaligned"
        self.error_flag = "NO" if aligned else "YES"


@dataclass(frozen=True)
class StructuredData:
    """The full structured document for one problem.

    ``anchors`` holds the constraint anchors in declaration order followed
    by exactly one objective anchor. The container is immutable; anchors
    themselves carry the mutable per-run state.
    """

    parameters: tuple[Parameter, ...]
    variables: tuple[VariableDecl, ...]
    anchors: tuple[Anchor, ...]
    source_problem: ProblemInstance

    def __post_init__(self) -> None:
        seen: set[str] = set()
        scalars: set[str] = set()
        for p in self.parameters:
            if p.symbol in seen:
                raise SchemaError(f"duplicate symbol {p.symbol!r}")
            seen.add(p.symbol)
            if p.is_scalar:
                scalars.add(p.symbol)
        for v in self.variables:
            if v.symbol in seen:
                raise SchemaError(f"duplicate symbol {v.symbol!r}")
            seen.add(v.symbol)
        for p in self.parameters:
            for dim in p.shape:
                if dim not in scalars:
                    raise SchemaError(
                        f"parameter {p.symbol}: shape symbol {dim!r} is not a scalar parameter"
                    )
        for v in self.variables:
            for dim in v.shape:
                if dim not in scalars:
                    raise SchemaError(
                        f"variable {v.symbol}: shape symbol {dim!r} is not a scalar parameter"
                    )
        objectives = [a for a in self.anchors if a.kind == "objective"]
        if len(objectives) != 1:
            raise SchemaError(f"expected exactly one objective anchor, got {len(objectives)}")
        if self.anchors[-1].kind != "objective":
            raise SchemaError("the objective must be the final anchor")
        for position, anchor in enumerate(self.anchors):
            if anchor.anchor_id != position:
                raise SchemaError(
                    f"anchor {anchor.anchor_id} out of order at position {position}"
                )

    @property
    def constraints(self) -> tuple[Anchor, ...]:
        return self.anchors[:-1]

    @property
    def objective(self) -> Anchor:
        return self.anchors[-1]

    def symbols(self) -> set[str]:
        """All declared symbols: parameters plus variables."""
        return {p.symbol for p in self.parameters} | {v.symbol for v in self.variables}


@dataclass(frozen=True)
class CandidateModel:
    """Code fragments for one candidate program.

    ``simp_fragments`` are the deterministically rendered parameter and
    variable declarations, in declaration order. ``sem_fragments`` maps
    anchor id to the agent-generated fragment for that anchor.
    """

    simp_fragments: tuple[tuple[str, str], ...]
    sem_fragments: dict[int, str]
    dialect: "TargetDialect"


def _status_for(code: str | None, error_flag: str) -> str:
    if code is None:
        return "unchecked"
    return {"": "unchecked", "YES": "misaligned", "NO": "aligned"}[error_flag]


def _parse_anchor(doc: Any, anchor_id: int, kind: str) -> Anchor:
    if not isinstance(doc, dict):
        raise SchemaError(f"{kind} entry must be an object, got {type(doc).__name__}")
    description = doc.get("description")
    if not description or not isinstance(description, str):
        raise SchemaError(f"{kind} entry missing required field 'description'")
    code = doc.get("code")
    if code is not None and not isinstance(code, str):
        raise SchemaError(f"{kind} {anchor_id}: 'code' must be a string or null")
    error_flag = doc.get("error", "")
    if error_flag not in ERROR_FLAGS:
        raise SchemaError(f"{kind} {anchor_id}: error flag {error_flag!r} not one of {ERROR_FLAGS}")
    reconstructed = doc.get("description_new")
    return Anchor(
        anchor_id=anchor_id,
        kind=kind,
        description=description,
        code=code,
        reconstructed=reconstructed,
        error_flag=error_flag,
        status=_status_for(code, error_flag),
    )


def parse_structured_data(raw: str, problem: ProblemInstance) -> StructuredData:
    """Parse structured-data JSON text into a validated :class:`StructuredData`.

    Unknown fields are ignored. Constraint order is preserved and the
    objective is appended as the final anchor. Raises :class:`SchemaError`
    on missing required fields, duplicate symbols, or dangling shape
    symbols; malformed JSON raises ``json.JSONDecodeError``.
    """
    doc = json.loads(raw)
    if not isinstance(doc, dict):
        raise SchemaError("top-level structured data must be a JSON object")
    for key in ("parameters", "variables", "constraints", "objective"):
        if key not in doc:
            raise SchemaError(f"missing required field {key!r}")

    parameters = []
    if not isinstance(doc["parameters"], list):
        raise SchemaError("'parameters' must be a list")
    for entry in doc["parameters"]:
        if not isinstance(entry, dict):
            raise SchemaError("parameter entry must be an object")
        if "symbol" not in entry:
            raise SchemaError("parameter entry missing required field 'symbol'")
        _require_symbol(entry["symbol"], "parameter")
        value = entry.get("value", "")
        parameters.append(
            Parameter(
                definition=entry.get("definition", "") or "",
                symbol=entry["symbol"],
                value="" if value is None else str(value),
                shape=_parse_shape(entry.get("shape", []), entry["symbol"]),
                code=entry.get("code", "") or "",
            )
        )

    variables = []
    if not isinstance(doc["variables"], dict):
        raise SchemaError("'variables' must be an object keyed by symbol")
    for symbol, entry in doc["variables"].items():
        _require_symbol(symbol, "variable")
        if not isinstance(entry, dict):
            raise SchemaError(f"variable {symbol}: entry must be an object")
        variables.append(
            VariableDecl(
                symbol=symbol,
                shape=_parse_shape(entry.get("shape", []), symbol),
                var_type=entry.get("type", "continuous"),
                definition=entry.get("definition", "") or "",
            )
        )

    if not isinstance(doc["constraints"], list):
        raise SchemaError("'constraints' must be a list")
    anchors = [
        _parse_anchor(entry, i, "constraint") for i, entry in enumerate(doc["constraints"])
    ]
    anchors.append(_parse_anchor(doc["objective"], len(anchors), "objective"))

    return StructuredData(
        parameters=tuple(parameters),
        variables=tuple(variables),
        anchors=tuple(anchors),
        source_problem=problem,
    )


def _parse_shape(shape: Any, symbol: str) -> tuple[str, ...]:
    if shape is None:
        return ()
    if not isinstance(shape, list) or not all(isinstance(s, str) for s in shape):
        raise SchemaError(f"{symbol}: shape must be a list of dimension symbols")
    return tuple(shape)


def serialize_structured_data(s: StructuredData, *, indent: int | None = 2) -> str:
    """Serialize back to the JSON wire format accepted by ``parse_structured_data``."""

    def anchor_doc(a: Anchor) -> dict[str, Any]:
        doc: dict[str, Any] = {"description": a.description, "code": a.code, "error": a.error_flag}
        if a.reconstructed is not None:
            doc["description_new"] = a.reconstructed
        return doc

    doc = {
        "parameters": [
            {
                "definition": p.definition,
                "symbol": p.symbol,
                "value": p.value,
                "shape": list(p.shape),
                "code": p.code,
            }
            for p in s.parameters
        ],
        "constraints": [anchor_doc(a) for a in s.constraints],
        "variables": {
            v.symbol: {
                "shape": list(v.shape),
                "type": v.var_type,
                "definition": v.definition,
            }
            for v in s.variables
        },
        "objective": anchor_doc(s.objective),
    }
    return json.dumps(doc, indent=indent)


def semantic_anchors(s: StructuredData) -> list[Anchor]:
    """The constraint anchors in declaration order, then the objective."""
    return list(s.anchors)
