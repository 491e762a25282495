"""The refine-and-inspect loop, its ablations, and the run-directory writer."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from ..mllm import Backend, BackendExhausted, MalformedResponse, Transcript
from ..render import RenderSet, image_digest, random_light_rig, render_views, upper_hemisphere_cameras
from ..render.io import write_rgb
from ..scene_lang import Diagnostic, SceneProgram, serialize_program
from . import coder, designer, inspector
from .types import EditSet, IterationRecord, PipelineConfig, PipelineResult, Query

log = logging.getLogger(__name__)


def iteration_seeds(seed: int, k: int) -> tuple[int, int]:
    """Independent (camera, light) seeds for iteration ``k``."""
    cam, light = np.random.SeedSequence([seed, k]).generate_state(2)
    return int(cam), int(light)


def render_iteration(p: SceneProgram, cfg: PipelineConfig, k: int) -> RenderSet:
    cam_seed, light_seed = iteration_seeds(cfg.seed, k)
    cams = upper_hemisphere_cameras(p, cfg.views_per_iteration, cam_seed, resolution=cfg.resolution)
    return render_views(p, cams, random_light_rig(light_seed), ("shaded",), iteration=k, jobs=cfg.jobs)


def _first_program(q: Query, cfg: PipelineConfig, b: Backend, transcript, result: PipelineResult) -> SceneProgram:
    if "designer" not in cfg.agents:
        return coder.direct_generate(q, b, cfg, transcript=transcript)
    result.canvas = designer.metricize(q, b, cfg, transcript=transcript)
    result.decomposition = designer.decompose(q, b, cfg.max_parts, cfg, transcript=transcript)
    result.arrangement = designer.propose_arrangement(
        q, result.decomposition, result.canvas, b, cfg, transcript=transcript, diagnostics=result.diagnostics
    )
    return coder.proposal_to_code(result.arrangement, cfg, b, query=q.text, transcript=transcript)


def _identify(rec: IterationRecord, q: Query, cfg: PipelineConfig, b: Backend, transcript) -> None:
    try:
        rec.predictions = inspector.identify(rec.renders, cfg, b, query=q, iteration=rec.iteration, transcript=transcript)
    except (MalformedResponse, BackendExhausted) as exc:
        rec.diagnostics.append(Diagnostic("IdentifierFailed", None, None, str(exc)))
        rec.predictions = []


def _edits(rec: IterationRecord, q: Query, cfg: PipelineConfig, b: Backend, transcript) -> EditSet | None:
    if not rec.predictions:
        return None
    try:
        rec.edits = inspector.recommend_edits(
            rec.renders, q, rec.predictions, b, cfg, iteration=rec.iteration, transcript=transcript
        )
    except (MalformedResponse, BackendExhausted) as exc:
        rec.diagnostics.append(Diagnostic("EditRecommenderFailed", None, None, str(exc)))
        return None
    rec.diagnostics.extend(rec.edits.diagnostics)
    return rec.edits


def run_pipeline(q: Query | str, cfg: PipelineConfig | None, b: Backend, *, transcript: Transcript | None = None) -> PipelineResult:
    """Design, code and inspect a prototype of ``q``.

    Iteration 0 refines the coarse program once and inspects it. While the
    inspector fails to recognize the query, edits are recommended and
    applied, for at most ``cfg.budget`` further iterations. The last program
    is returned whether or not it was recognized. Designer errors propagate;
    coder and inspector failures degrade to keeping the previous state.
    """
    q = q if isinstance(q, Query) else Query(q)
    cfg = cfg or PipelineConfig()
    transcript = transcript if transcript is not None else Transcript()
    result = PipelineResult(q.text, None, [], "budget_exhausted", transcript=transcript)

    coarse = _first_program(q, cfg, b, transcript, result)
    result.coarse_program = coarse
    if "coder" in cfg.agents:
        diags: list[Diagnostic] = []
        program = coder.refine_code(coarse, None, cfg, b, query=q, iteration=0, transcript=transcript, diagnostics=diags)
    else:
        program, diags = coarse, []
    rec = IterationRecord(0, program, render_iteration(program, cfg, 0), diagnostics=diags)
    result.iterations.append(rec)

    if "inspector" not in cfg.agents:
        result.program = program
        result.stop_reason = "no_inspector"
        return result

    _identify(rec, q, cfg, b, transcript)
    for k in range(1, cfg.budget + 1):
        if inspector.matches(rec.predictions, q, cfg.match_mode):
            break
        edits = _edits(rec, q, cfg, b, transcript)
        diags = []
        program = coder.refine_code(
            rec.program, edits, cfg, b, query=q, iteration=k, transcript=transcript, diagnostics=diags
        )
        rec = IterationRecord(k, program, render_iteration(program, cfg, k), diagnostics=diags)
        result.iterations.append(rec)
        _identify(rec, q, cfg, b, transcript)

    result.program = rec.program
    result.stop_reason = "identified" if inspector.matches(rec.predictions, q, cfg.match_mode) else "budget_exhausted"
    return result


def result_summary(result: PipelineResult, cfg: PipelineConfig | None = None) -> dict:
    doc = {
        "query": result.query,
        "stop_reason": result.stop_reason,
        "refinements": result.refinements,
        "final_program": serialize_program(result.program),
        "canvas": list(result.canvas.dims) if result.canvas else None,
        "decomposition": [list(e) for e in result.decomposition.entries] if result.decomposition else None,
        "diagnostics": [str(d) for d in result.diagnostics],
        "iterations": [],
    }
    for rec in result.iterations:
        doc["iterations"].append(
            {
                "iteration": rec.iteration,
                "predictions": rec.predictions,
                "edits": [e.to_dict() for e in rec.edits] if rec.edits else [],
                "render_digests": [image_digest(v.pixels) for v in rec.renders.views] if rec.renders else [],
                "cameras": [v.camera.to_dict() for v in rec.renders.views] if rec.renders else [],
                "lights": rec.renders.lights.to_dict() if rec.renders and rec.renders.lights else None,
                "diagnostics": [str(d) for d in rec.diagnostics],
            }
        )
    if cfg is not None:
        doc["config"] = {
            "budget": cfg.budget,
            "views_per_iteration": cfg.views_per_iteration,
            "max_parts": cfg.max_parts,
            "top_p_predictions": cfg.top_p_predictions,
            "temperature": cfg.temperature,
            "agents": sorted(cfg.agents),
            "seed": cfg.seed,
            "model_id": cfg.model_id,
            "proposal_mode": cfg.proposal_mode,
            "match_mode": cfg.match_mode,
            "strict": cfg.strict,
        }
    return doc


def write_run_dir(result: PipelineResult, out_dir: str | Path, cfg: PipelineConfig | None = None) -> Path:
    """Write ``run.json``, ``iter_k/program.psc``, ``iter_k/view_j.png`` and ``transcript.jsonl``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rec in result.iterations:
        d = out / f"iter_{rec.iteration}"
        d.mkdir(exist_ok=True)
        (d / "program.psc").write_text(serialize_program(rec.program), encoding="utf-8")
        if rec.renders:
            for j, view in enumerate(rec.renders.by_mode("shaded")):
                write_rgb(d / f"view_{j}.png", view.pixels)
    (out / "final.psc").write_text(serialize_program(result.program), encoding="utf-8")
    if result.transcript is not None:
        result.transcript.write_jsonl(out / "transcript.jsonl")
    (out / "run.json").write_text(json.dumps(result_summary(result, cfg), indent=2), encoding="utf-8")
    return out
