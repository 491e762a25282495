"""Prompt templates with named slots, and the ask-parse-resubmit helper every agent uses."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from ..mllm import (
    Backend,
    ChatRequest,
    ExtractionError,
    MalformedResponse,
    Message,
    RequestTag,
    complete_with_retries,
)
from ..scene_lang import SceneSyntaxError

SLOTS = ("q", "C", "D", "A", "P_prev", "E", "n_parts", "s", "p", "q_hat", "L")
_SLOT_RE = re.compile(r"\{(" + "|".join(SLOTS) + r")\}")
LANGUAGE_NAME = "ProtoScene"

# fixture/transcript module names
METRICIZER = "Metricizer"
DECOMPOSER = "PartDecomposer"
ARRANGER = "ArrangementProposer"
PROPOSAL2CODE = "Proposal2Code"
REFINER = "CodeRefiner"
IDENTIFIER = "Identifier"
EDITOR = "EditRecommender"
DIRECT = "DirectGenerator"
NAIVE = "Naive"


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return resources.files(__package__).joinpath("templates", f"{name}.txt").read_text(encoding="utf-8")


def fill(template: str, **slots) -> str:
    """Substitute ``{slot}`` markers; other braces (JSON examples) are left alone.

    Every known slot present in the template must be supplied.
    """
    unknown = set(slots) - set(SLOTS)
    if unknown:
        raise KeyError(f"unknown template slots {sorted(unknown)}")

    def sub(m: re.Match) -> str:
        key = m.group(1)
        if key not in slots:
            raise KeyError(f"template slot {{{key}}} was not supplied")
        return str(slots[key])

    return _SLOT_RE.sub(sub, template)


def render_prompt(name: str, **slots) -> str:
    return fill(load_template(name), **slots)


def system_message() -> str:
    return render_prompt("protoscene_reference", L=LANGUAGE_NAME)


def ask(
    backend: Backend,
    module: str,
    query: str,
    prompt: str,
    parse,
    cfg,
    *,
    iteration: int = 0,
    images: tuple[bytes, ...] = (),
    transcript=None,
    system: bool = False,
):
    """Send ``prompt`` and parse the reply, resubmitting verbatim while parsing fails.

    Transport failures are retried inside each attempt. After
    ``cfg.max_retries`` failed parses the last problem is raised as
    :class:`MalformedResponse`.
    """
    messages = ([Message("system", system_message())] if system else []) + [Message("user", prompt)]
    last: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        request = ChatRequest(
            tuple(messages),
            images,
            cfg.temperature,
            cfg.model_id,
            tag=RequestTag(module, query, iteration, attempt),
        )
        text = complete_with_retries(
            backend, request, cfg.max_retries, transcript=transcript, pause=cfg.retry_pause
        )
        try:
            return parse(text)
        except (ExtractionError, SceneSyntaxError) as exc:
            last = exc
    if isinstance(last, MalformedResponse):
        raise last
    raise MalformedResponse(f"{module}: {last}") from last
