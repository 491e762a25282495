"""Inspector stage: identify the rendered object and recommend edits when it is misread."""

from __future__ import annotations

import json
import re

from ..mllm import MAX_IMAGES, Backend, MalformedResponse, extract_dict_list, extract_list
from ..render import RenderSet
from ..render.io import png_bytes
from ..scene_lang import Diagnostic
from . import prompts
from .types import EDIT_TYPES, MAX_EDITS, Edit, EditSet, PipelineConfig, Query

_KEYS = {
    "aspect": ("visual_aspect", "aspect", "v", "feature", "part"),
    "edit_type": ("edit_type", "type", "tau", "edit"),
    "command": ("command", "instruction", "w", "description"),
}


def normalize_name(s: str) -> str:
    return " ".join(re.sub(r"[^0-9a-z]+", " ", s.lower()).split())


def matches(predictions, q: Query | str, mode: str = "any") -> bool:
    """Stopping rule: does a prediction name the query (after normalization)?"""
    target = normalize_name(str(q))
    preds = list(predictions)
    if mode == "top1":
        preds = preds[:1]
    elif mode != "any":
        raise ValueError(f"unknown match mode {mode!r}")
    return any(normalize_name(p) == target for p in preds)


def shaded_images(r: RenderSet) -> tuple[bytes, ...]:
    views = r.by_mode("shaded")
    if not views:
        raise ValueError("render set has no shaded views")
    return tuple(png_bytes(v.pixels) for v in views[:MAX_IMAGES])


def parse_predictions(text: str, top_p: int) -> list[str]:
    preds = [p.strip() for p in extract_list(text) if p.strip()]
    if not preds:
        raise MalformedResponse("empty prediction list")
    return preds[:top_p]


def identify(r: RenderSet, cfg: PipelineConfig, b: Backend, *, query: Query, iteration: int = 0, transcript=None) -> list[str]:
    """Up to ``cfg.top_p_predictions`` guesses for what the rendered views show."""
    images = shaded_images(r)
    prompt = prompts.render_prompt(
        "identifier", s=len(images), p=cfg.top_p_predictions, L=prompts.LANGUAGE_NAME
    )
    return prompts.ask(
        b,
        prompts.IDENTIFIER,
        query.text,
        prompt,
        lambda t: parse_predictions(t, cfg.top_p_predictions),
        cfg,
        iteration=iteration,
        images=images,
        transcript=transcript,
    )


def _field(item: dict, name: str):
    for key in _KEYS[name]:
        if key in item and str(item[key]).strip():
            return str(item[key])
    return None


def parse_edits(text: str) -> EditSet:
    items = extract_dict_list(text)
    edits, diags = [], []
    for n, item in enumerate(items[:MAX_EDITS]):
        values = {name: _field(item, name) for name in _KEYS}
        missing = [k for k, v in values.items() if v is None]
        if missing:
            raise MalformedResponse(f"edit {n} lacks {missing}")
        e = Edit(**values)
        if e.edit_type.lower() not in EDIT_TYPES:
            diags.append(Diagnostic("UnknownEditType", e.aspect, "edit_type", f"{e.edit_type!r} accepted as given"))
        edits.append(e)
    if len(items) > MAX_EDITS:
        diags.append(Diagnostic("TooManyEdits", None, None, f"kept the first {MAX_EDITS} of {len(items)}"))
    return EditSet(tuple(edits), tuple(diags))


def recommend_edits(
    r: RenderSet,
    q: Query,
    q_hat: list[str],
    b: Backend,
    cfg: PipelineConfig | None = None,
    *,
    iteration: int = 0,
    transcript=None,
) -> EditSet:
    """Ask why the renders were misread and how to change the model (at most five edits)."""
    if not q_hat:
        raise ValueError("need at least one prediction")
    cfg = cfg or PipelineConfig()
    prompt = prompts.render_prompt("edit_recommender", q=q.text, q_hat=json.dumps(list(q_hat)))
    return prompts.ask(
        b,
        prompts.EDITOR,
        q.text,
        prompt,
        parse_edits,
        cfg,
        iteration=iteration,
        images=shaded_images(r),
        transcript=transcript,
    )
