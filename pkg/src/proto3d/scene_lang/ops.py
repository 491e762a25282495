"""Serialization, validation and arrangement realization for ProtoScene."""

from __future__ import annotations

import math

from .model import (
    Arrangement,
    Cuboid,
    Diagnostic,
    Material,
    PartNode,
    Pose,
    SceneProgram,
)


class InvalidArrangement(ValueError):
    pass


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips a float64 exactly
    s = repr(float(x))
    return "0.0" if s == "-0.0" else s


def _fmt_vec(v) -> str:
    return "[" + ", ".join(_fmt(c) for c in v) + "]"


def _quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt_kind(kind) -> str:
    if isinstance(kind, Cuboid):
        return f"cuboid dims {_fmt_vec(kind.dims)}"
    return kind.kind + " " + " ".join(_fmt(v) for v in kind.params().values())


def serialize_program(p: SceneProgram) -> str:
    """Canonical text for ``p``; ``parse_program(serialize_program(p)) == p``."""
    lines = []
    if p.canvas is not None:
        lines.append(f"canvas {_fmt_vec(p.canvas)}")
    for part in p.parts:
        lines.append(f"part {_quote(part.label)} {{")
        lines.append(f"  {_fmt_kind(part.kind)}")
        lines.append(f"  pos {_fmt_vec(part.pose.position)}")
        lines.append(f"  rot {_fmt_vec(part.pose.rotation)}")
        lines.append(f"  rgb {_fmt_vec(part.material.albedo)}")
        lines.append("}")
    return "\n".join(lines) + "\n"


def validate(p: SceneProgram) -> list[Diagnostic]:
    """Check every type invariant; returns an empty list for a renderable program."""
    out: list[Diagnostic] = []
    if not p.parts:
        out.append(Diagnostic("EmptyProgram", None, None, "program has no parts"))
    if p.canvas is not None:
        for axis, v in zip("xyz", p.canvas):
            if not math.isfinite(v):
                out.append(Diagnostic("NonFinite", None, f"canvas.{axis}", f"{v}"))
            elif v <= 0:
                out.append(Diagnostic("NonPositiveDimension", None, f"canvas.{axis}", f"{v} <= 0"))
    seen: set[str] = set()
    for part in p.parts:
        label = part.label
        if not label or not label.strip():
            out.append(Diagnostic("EmptyLabel", label, "label", "label must be non-empty"))
        elif "\n" in label or "\r" in label:
            out.append(Diagnostic("InvalidLabel", label, "label", "label may not contain line breaks"))
        if label in seen:
            out.append(Diagnostic("DuplicateLabel", label, "label", "label used more than once"))
        seen.add(label)
        for name, v in part.kind.params().items():
            if not math.isfinite(v):
                out.append(Diagnostic("NonFinite", label, name, f"{v}"))
            elif v <= 0:
                out.append(Diagnostic("NonPositiveDimension", label, name, f"{v} <= 0"))
        for prefix, vec in (("pos", part.pose.position), ("rot", part.pose.rotation)):
            for axis, v in zip("xyz", vec):
                if not math.isfinite(v):
                    out.append(Diagnostic("NonFinite", label, f"{prefix}.{axis}", f"{v}"))
        for ch, v in zip("rgb", part.material.albedo):
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                out.append(Diagnostic("AlbedoRange", label, f"rgb.{ch}", f"{v} outside [0, 1]"))
    return out


def arrangement_to_program(a: Arrangement, material: Material | None = None) -> SceneProgram:
    """Realize each arrangement cuboid as one ProtoScene cuboid part, preserving label and pose."""
    material = material or Material()
    parts = []
    for e in a.entries:
        for axis, v in zip("xyz", e.dims):
            if not (math.isfinite(v) and v > 0):
                raise InvalidArrangement(f"{e.label}: dims.{axis} = {v} must be positive and finite")
        parts.append(PartNode(e.label, Cuboid(e.dims), Pose(e.position, e.rotation), material))
    labels = [p.label for p in parts]
    if len(set(labels)) != len(labels):
        raise InvalidArrangement("arrangement labels are not unique")
    return SceneProgram(tuple(parts))
