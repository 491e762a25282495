"""Prototype-label to target-label mapping, by backend or by name normalization."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..mllm import (
    Backend,
    ChatRequest,
    ExtractionError,
    MalformedResponse,
    RequestTag,
    complete_with_retries,
    extract_json,
)

MAPPER_MODULE = "PartMapper"

_MAPPER_PROMPT = (
    "Two labelled part lists describe the same kind of object.\n"
    "Prototype parts: {proto}\n"
    "Target parts: {target}\n"
    "For every prototype part pick the target part it corresponds to. "
    "Leave out prototype parts that have no counterpart.\n"
    "Reply with one JSON object mapping prototype label to target label."
)


@dataclass
class PartMapping:
    pairs: dict[str, str] = field(default_factory=dict)  # prototype label -> target label
    unmapped: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"pairs": dict(self.pairs), "unmapped": list(self.unmapped), "notes": list(self.notes)}


def normalize_label(label: str) -> str:
    """Lowercase, drop digits and punctuation, and singularize each word."""
    words = re.sub(r"[^a-z]+", " ", label.lower()).split()
    out = []
    for w in words:
        if len(w) > 3 and w.endswith("ies"):
            w = w[:-3] + "y"
        elif len(w) > 2 and w.endswith("s") and not w.endswith("ss"):
            w = w[:-1]
        out.append(w)
    return " ".join(out)


def _fallback(proto: list[str], target: list[str]) -> PartMapping:
    by_norm: dict[str, set[str]] = {}
    by_case: dict[str, set[str]] = {}
    for t in target:
        by_norm.setdefault(normalize_label(t), set()).add(t)
        by_case.setdefault(t.strip().lower(), set()).add(t)
    m = PartMapping()
    for p in proto:
        # an exact (case-insensitive) name wins before digits and plurals are dropped
        hits = by_case.get(p.strip().lower(), set())
        if len(hits) != 1:
            hits = by_norm.get(normalize_label(p), set())
        if len(hits) == 1:
            m.pairs[p] = next(iter(hits))
        else:
            m.unmapped.append(p)
            if len(hits) > 1:
                m.notes.append(f"{p!r} is ambiguous between {sorted(hits)}")
    return m


def _from_backend(proto: list[str], target: list[str], backend: Backend, query: str, transcript) -> PartMapping:
    prompt = _MAPPER_PROMPT.format(proto=json.dumps(proto), target=json.dumps(sorted(set(target))))
    request = ChatRequest.simple(prompt, temperature=0.0, tag=RequestTag(MAPPER_MODULE, query))
    text = complete_with_retries(backend, request, transcript=transcript, pause=0.0)
    try:
        raw = extract_json(text)
    except ExtractionError as exc:
        raise MalformedResponse(f"part mapping: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedResponse("part mapping must be a JSON object")
    targets = set(target)
    m = PartMapping()
    for p in proto:
        t = raw.get(p)
        if isinstance(t, str) and t in targets:
            m.pairs[p] = t
        else:
            m.unmapped.append(p)
            if t is not None:
                m.notes.append(f"{p!r} mapped to unknown target label {t!r}")
    return m


def map_parts(proto, target, backend: Backend | None = None, *, query: str = "", transcript=None) -> PartMapping:
    """Map each prototype label onto at most one target label; the rest are reported as unmapped."""
    proto, target = list(proto), list(target)
    if not proto or not target:
        raise ValueError("both label lists must be non-empty")
    if len(set(proto)) != len(proto):
        raise ValueError("prototype labels must be unique")
    if backend is None:
        return _fallback(proto, target)
    return _from_backend(proto, target, backend, query, transcript)
