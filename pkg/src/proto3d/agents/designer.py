"""Designer stage: canvas size, part decomposition and the cuboid arrangement."""

from __future__ import annotations

import json
import math
import re

from ..geomeval.mapping import normalize_label
from ..mllm import Backend, ExtractionError, MalformedResponse, extract_json, extract_list, extract_numeric_list
from ..scene_lang import Arrangement, ArrangementEntry, Diagnostic
from . import prompts
from .types import (
    Canvas,
    CountMismatch,
    DesignerError,
    LengthMismatch,
    MissingField,
    PartDecomposition,
    PipelineConfig,
    Query,
)

ARRANGEMENT_FIELDS = ("length", "width", "height", "location", "rotation")
FIT_FACTOR = 1.5

_NUM = r"\d+(?:\.\d*)?|\.\d+"
_PI_RE = re.compile(
    rf"(?<![\w.])(-)?(?:({_NUM})\s*\*\s*)?(?:math\.|np\.|numpy\.)?pi\b(?:\s*/\s*({_NUM}))?(?:\s*\*\s*({_NUM}))?"
)


def _pi_value(m: re.Match) -> str:
    v = math.pi
    if m.group(2):
        v *= float(m.group(2))
    if m.group(3):
        v /= float(m.group(3))
    if m.group(4):
        v *= float(m.group(4))
    return repr(-v if m.group(1) else v)


def expand_pi(text: str) -> str:
    """Replace expressions such as ``pi/2``, ``-math.pi`` or ``0.5*pi`` with their values."""
    return _PI_RE.sub(_pi_value, text)


def _number(value, part: str, field_name: str) -> float:
    if isinstance(value, bool):
        raise MalformedResponse(f"{part}.{field_name}: expected a number")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(expand_pi(value.strip()))
        except ValueError:
            pass
    raise MalformedResponse(f"{part}.{field_name}: expected a number, got {value!r}")


def _vec(value, part: str, field_name: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise MalformedResponse(f"{part}.{field_name}: expected a list of 3 numbers")
    return tuple(_number(v, part, field_name) for v in value)


def parse_canvas(text: str) -> Canvas:
    values = extract_numeric_list(text)
    if len(values) != 3:
        raise MalformedResponse(f"expected 3 dimensions, got {len(values)}")
    return Canvas(tuple(values))


def metricize(q: Query, b: Backend, cfg: PipelineConfig | None = None, *, transcript=None) -> Canvas:
    """Ask for the overall (length, width, height) of the category in metres."""
    cfg = cfg or PipelineConfig()
    prompt = prompts.render_prompt("metricizer", q=q.text)
    return prompts.ask(b, prompts.METRICIZER, q.text, prompt, parse_canvas, cfg, transcript=transcript)


def _first_numeric_list(text: str) -> list[float]:
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    m = re.search(r"part_counts\s*=\s*(\[[^\[\]]*\])", text)
    if m:
        return extract_numeric_list(m.group(1))
    for m in re.finditer(r"\[[^\[\]]*\]", text):
        try:
            return extract_numeric_list(m.group())
        except ExtractionError:
            continue
    raise MalformedResponse("no list of part counts in response")


def parse_decomposition(text: str, max_parts: int) -> PartDecomposition:
    m = re.search(r"part_list\s*=\s*(\[.*?\])", text, re.DOTALL)
    labels = extract_list(m.group(1) if m else text)
    counts = _first_numeric_list(text)
    if len(labels) != len(counts):
        raise LengthMismatch(f"{len(labels)} part labels but {len(counts)} counts")
    if not labels:
        raise MalformedResponse("empty part list")
    if len(labels) > max_parts:
        raise MalformedResponse(
            f"{len(labels)} parts exceed the limit of {max_parts}; excess: {labels[max_parts:]}"
        )
    if any(c != int(c) or c < 1 for c in counts):
        raise MalformedResponse(f"part counts must be positive integers, got {counts}")
    try:
        return PartDecomposition(tuple(zip(labels, (int(c) for c in counts))))
    except ValueError as exc:
        raise MalformedResponse(str(exc)) from exc


def decompose(q: Query, b: Backend, max_parts: int = 8, cfg: PipelineConfig | None = None, *, transcript=None) -> PartDecomposition:
    """Ask for the category's parts and how many instances of each it has."""
    if max_parts < 1:
        raise ValueError("max_parts must be >= 1")
    cfg = cfg or PipelineConfig()
    prompt = prompts.render_prompt("decomposer", q=q.text, n_parts=max_parts)
    return prompts.ask(
        b, prompts.DECOMPOSER, q.text, prompt, lambda t: parse_decomposition(t, max_parts), cfg, transcript=transcript
    )


def format_decomposition(d: PartDecomposition) -> str:
    return f"Common parts: {json.dumps(d.labels)}\nPart counts: {json.dumps(d.counts)}"


def parse_arrangement(text: str) -> Arrangement:
    raw = extract_json(expand_pi(text))
    if not isinstance(raw, dict) or not raw:
        raise MalformedResponse("arrangement must be a non-empty JSON object keyed by part label")
    entries = []
    for label, spec in raw.items():
        if not isinstance(spec, dict):
            raise MalformedResponse(f"arrangement entry {label!r} is not an object")
        lowered = {str(k).lower(): v for k, v in spec.items()}
        for f in ARRANGEMENT_FIELDS:
            if f not in lowered:
                raise MissingField(label, f)
        dims = tuple(_number(lowered[f], label, f) for f in ("length", "width", "height"))
        if not all(math.isfinite(v) and v > 0 for v in dims):
            raise MalformedResponse(f"{label}: sizes must be positive, got {list(dims)}")
        entries.append(
            ArrangementEntry(
                label,
                dims,
                _vec(lowered["location"], label, "location"),
                _vec(lowered["rotation"], label, "rotation"),
            )
        )
    return Arrangement(tuple(entries))


def check_arrangement(a: Arrangement, d: PartDecomposition, c: Canvas) -> list[Diagnostic]:
    """Instance counts against the decomposition, and part sizes against the canvas."""
    diags: list[Diagnostic] = []
    wanted = {normalize_label(l): (l, n) for l, n in d.entries}
    found: dict[str, int] = {}
    for e in a.entries:
        key = normalize_label(e.label)
        if key in wanted:
            found[key] = found.get(key, 0) + 1
        else:
            diags.append(Diagnostic("UnexpectedPart", e.label, None, "part is not in the decomposition"))
    for key, (label, n) in wanted.items():
        got = found.get(key, 0)
        if got != n:
            diags.append(Diagnostic("CountMismatch", label, None, f"expected {n} instance(s), found {got}"))
    for e in a.entries:
        for axis, size, bound in zip("lwh", e.dims, c.dims):
            if size > FIT_FACTOR * bound:
                diags.append(
                    Diagnostic("ExceedsCanvas", e.label, axis, f"{size:g} m exceeds {FIT_FACTOR}x canvas ({bound:g} m)")
                )
    return diags


def propose_arrangement(
    q: Query,
    d: PartDecomposition,
    c: Canvas,
    b: Backend,
    cfg: PipelineConfig | None = None,
    *,
    transcript=None,
    diagnostics: list | None = None,
) -> Arrangement:
    """Ask for one cuboid per part instance and check it against the decomposition.

    Count problems raise :class:`CountMismatch` in strict mode and are
    appended to ``diagnostics`` otherwise.
    """
    cfg = cfg or PipelineConfig()
    prompt = prompts.render_prompt(
        "arrangement", q=q.text, C=json.dumps(list(c.dims)), D=format_decomposition(d)
    )
    a = prompts.ask(b, prompts.ARRANGER, q.text, prompt, parse_arrangement, cfg, transcript=transcript)
    diags = check_arrangement(a, d, c)
    counts = [x for x in diags if x.code == "CountMismatch"]
    if cfg.strict and counts:
        raise CountMismatch("; ".join(str(x) for x in counts))
    if diagnostics is not None:
        diagnostics.extend(diags)
    return a


__all__ = [
    "DesignerError",
    "check_arrangement",
    "decompose",
    "expand_pi",
    "metricize",
    "parse_arrangement",
    "parse_canvas",
    "parse_decomposition",
    "propose_arrangement",
]
