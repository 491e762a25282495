"""Coder stage: arrangement to program, iterative refinement, and the one-prompt baselines."""

from __future__ import annotations

import json
import logging

from ..mllm import Backend, BackendExhausted, MalformedResponse, extract_code_block
from ..scene_lang import (
    Arrangement,
    Diagnostic,
    SceneProgram,
    arrangement_to_program,
    parse_program,
    serialize_program,
    validate,
)
from . import prompts
from .types import EditSet, PipelineConfig, Query

log = logging.getLogger(__name__)


def parse_program_response(text: str) -> SceneProgram:
    """Parse the first fenced block (or the whole reply) as a program that also validates."""
    program = parse_program(extract_code_block(text, "protoscene"))
    problems = validate(program)
    if problems:
        raise MalformedResponse("program does not validate: " + "; ".join(str(d) for d in problems))
    return program


def arrangement_json(a: Arrangement) -> str:
    doc = {
        e.label: {
            "length": e.dims[0],
            "width": e.dims[1],
            "height": e.dims[2],
            "location": list(e.position),
            "rotation": list(e.rotation),
        }
        for e in a.entries
    }
    return json.dumps(doc, indent=2)


def format_edits(edits: EditSet) -> str:
    return "\n".join(f"- [{e.edit_type}] {e.aspect}: {e.command}" for e in edits)


def proposal_to_code(a: Arrangement, cfg: PipelineConfig | None = None, b: Backend | None = None, *, query: str = "", transcript=None) -> SceneProgram:
    """Turn the layout into a cuboid program, mechanically or by asking the model."""
    cfg = cfg or PipelineConfig()
    if cfg.proposal_mode == "deterministic":
        return arrangement_to_program(a)
    if b is None:
        raise ValueError("mllm proposal mode needs a backend")
    prompt = prompts.render_prompt("proposal2code", q=query, A=arrangement_json(a), L=prompts.LANGUAGE_NAME)
    return prompts.ask(
        b, prompts.PROPOSAL2CODE, query, prompt, parse_program_response, cfg, transcript=transcript, system=True
    )


def refiner_prompt(q: Query, p_prev: SceneProgram, edits: EditSet | None) -> str:
    edit_block = prompts.render_prompt("refiner_edits", E=format_edits(edits)) if edits else ""
    return prompts.render_prompt(
        "code_refiner", q=q.text, P_prev=serialize_program(p_prev), E=edit_block, L=prompts.LANGUAGE_NAME
    )


def refine_code(
    p_prev: SceneProgram,
    edits: EditSet | None,
    cfg: PipelineConfig | None,
    b: Backend,
    *,
    query: Query,
    iteration: int = 0,
    transcript=None,
    diagnostics: list | None = None,
) -> SceneProgram:
    """One refinement round. Never loses the last good program: failures return ``p_prev``."""
    cfg = cfg or PipelineConfig()
    prompt = refiner_prompt(query, p_prev, edits)
    try:
        return prompts.ask(
            b,
            prompts.REFINER,
            query.text,
            prompt,
            parse_program_response,
            cfg,
            iteration=iteration,
            transcript=transcript,
            system=True,
        )
    except (MalformedResponse, BackendExhausted) as exc:
        log.warning("refinement %d failed, keeping previous program: %s", iteration, exc)
        if diagnostics is not None:
            diagnostics.append(Diagnostic("RefinerFailsafe", None, None, f"iteration {iteration}: {exc}"))
        return p_prev


def direct_generate(q: Query, b: Backend, cfg: PipelineConfig | None = None, *, transcript=None) -> SceneProgram:
    """First program without the designer stage (ablation)."""
    cfg = cfg or PipelineConfig()
    prompt = prompts.render_prompt("direct_generation", q=q.text, L=prompts.LANGUAGE_NAME)
    return prompts.ask(b, prompts.DIRECT, q.text, prompt, parse_program_response, cfg, transcript=transcript, system=True)


def run_naive(q: Query, b: Backend, cfg: PipelineConfig | None = None, *, transcript=None) -> SceneProgram:
    """Non-agentic baseline: a single bare request, parsed with the usual resubmission."""
    cfg = cfg or PipelineConfig()
    prompt = prompts.render_prompt("naive", q=q.text)
    return prompts.ask(b, prompts.NAIVE, q.text, prompt, parse_program_response, cfg, transcript=transcript, system=True)
