"""Designer, coder and inspector agents and the self-refinement loop."""

from .coder import direct_generate, parse_program_response, proposal_to_code, refine_code, run_naive
from .designer import decompose, expand_pi, metricize, propose_arrangement
from .inspector import identify, matches, normalize_name, recommend_edits
from .pipeline import render_iteration, result_summary, run_pipeline, write_run_dir
from .prompts import SLOTS, fill, load_template, render_prompt, system_message
from .types import (
    AGENTS,
    EDIT_TYPES,
    Canvas,
    CountMismatch,
    DesignerError,
    Edit,
    EditSet,
    ImplausibleDims,
    IterationRecord,
    LengthMismatch,
    MissingField,
    PartDecomposition,
    PipelineConfig,
    PipelineResult,
    Query,
)

__all__ = [
    "AGENTS",
    "EDIT_TYPES",
    "SLOTS",
    "Canvas",
    "CountMismatch",
    "DesignerError",
    "Edit",
    "EditSet",
    "ImplausibleDims",
    "IterationRecord",
    "LengthMismatch",
    "MissingField",
    "PartDecomposition",
    "PipelineConfig",
    "PipelineResult",
    "Query",
    "decompose",
    "direct_generate",
    "expand_pi",
    "fill",
    "identify",
    "load_template",
    "matches",
    "metricize",
    "normalize_name",
    "parse_program_response",
    "propose_arrangement",
    "proposal_to_code",
    "recommend_edits",
    "refine_code",
    "render_iteration",
    "render_prompt",
    "result_summary",
    "run_naive",
    "run_pipeline",
    "system_message",
    "write_run_dir",
]
