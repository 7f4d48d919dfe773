"""Anchor-guided translation of natural-language optimization problems.

The pipeline extracts a structured document from prose, renders parameters
and variables through deterministic templates, translates each constraint
and the objective by agent call, then iteratively corrects the generated
fragments: it reconstructs what each fragment actually says, verifies that
against the original anchor text, and regenerates only the anchors that
fail. The aligned model is assembled into a runnable program whose
execution (in the external sandbox runner) is judged against ground truth.
"""

from .assemble import (
    AssembledProgram,
    Debugger,
    ExecutionResult,
    IncompleteModel,
    assemble,
)
from .bench import (
    BenchReport,
    DatasetManifest,
    EvalRecord,
    FormatError,
    judge,
    load_dataset,
    run_bench,
)
from .driver import PipelineContext, SolveOutcome, solve_problem
from .engine import CorrectionEngine, EngineConfig, RunTrace, StageError
from .gateway import (
    Cassette,
    CompletionRequest,
    EmbeddingVector,
    Gateway,
    GatewayConfig,
    ReplayMiss,
    TransportError,
)
from .prompting import (
    MissingBinding,
    ParseError,
    PromptLibrary,
    PromptTemplate,
    parse_fenced,
    parse_yes_no,
    render,
)
from .runner_client import RunnerClient, SandboxUnavailable
from .schema import (
    Anchor,
    CandidateModel,
    Parameter,
    ProblemInstance,
    SchemaError,
    StructuredData,
    VariableDecl,
    parse_structured_data,
    semantic_anchors,
    serialize_structured_data,
)
from .scripting import AnchorRound, CassetteScript
from .translate import (
    TargetDialect,
    Translator,
    default_dialect,
    load_dialect,
    render_simple,
    undeclared_identifiers,
)
from .verify import (
    DimensionMismatch,
    Verdict,
    Verifier,
    VerifierConfig,
    ZeroVector,
    cosine,
)

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "AnchorRound",
    "AssembledProgram",
    "BenchReport",
    "CandidateModel",
    "Cassette",
    "CassetteScript",
    "CompletionRequest",
    "CorrectionEngine",
    "DatasetManifest",
    "Debugger",
    "DimensionMismatch",
    "EmbeddingVector",
    "EngineConfig",
    "EvalRecord",
    "ExecutionResult",
    "FormatError",
    "Gateway",
    "GatewayConfig",
    "IncompleteModel",
    "MissingBinding",
    "Parameter",
    "ParseError",
    "PipelineContext",
    "ProblemInstance",
    "PromptLibrary",
    "PromptTemplate",
    "ReplayMiss",
    "RunTrace",
    "RunnerClient",
    "SandboxUnavailable",
    "SchemaError",
    "SolveOutcome",
    "StageError",
    "StructuredData",
    "TargetDialect",
    "TransportError",
    "Translator",
    "VariableDecl",
    "Verdict",
    "Verifier",
    "VerifierConfig",
    "ZeroVector",
    "assemble",
    "cosine",
    "default_dialect",
    "judge",
    "load_dataset",
    "load_dialect",
    "parse_fenced",
    "parse_structured_data",
    "parse_yes_no",
    "render",
    "render_simple",
    "run_bench",
    "semantic_anchors",
    "serialize_structured_data",
    "solve_problem",
    "undeclared_identifiers",
]
