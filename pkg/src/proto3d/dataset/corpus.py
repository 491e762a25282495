"""Batch rendering of prototype programs into an image corpus with a JSON manifest."""

from __future__ import annotations

import json
import logging
import re
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from ..render import MODES, render_views
from ..render.camera import parse_rig
from ..render.io import write_camera_metadata, write_image
from ..render.raymarch import random_light_rig
from ..scene_lang import SceneProgram, serialize_program, validate

log = logging.getLogger(__name__)
MANIFEST = "manifest.json"


@dataclass
class RenderFailure:
    query: str
    seed: int
    reason: str


@dataclass
class CorpusEntry:
    query: str
    seed: int
    program: str  # paths are relative to the corpus root
    renders: dict[str, list[str]]
    cameras: str
    sidecars: list[str] = field(default_factory=list)


@dataclass
class CorpusManifest:
    entries: list[CorpusEntry]
    failures: list[RenderFailure]
    config: dict

    def files(self) -> set[str]:
        out = {MANIFEST}
        for e in self.entries:
            out.add(e.program)
            out.add(e.cameras)
            out.update(e.sidecars)
            for paths in e.renders.values():
                out.update(paths)
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "entries": [vars(e) for e in self.entries],
            "failures": [vars(f) for f in self.failures],
        }


def slug(query: str) -> str:
    s = re.sub(r"[^0-9A-Za-z._-]+", "_", query.strip()).strip("_")
    return s or "query"


def _render_one(query: str, seed: int, p: SceneProgram, rig: str, modes, root: Path, resolution, jobs: int) -> CorpusEntry:
    problems = validate(p)
    if problems:
        raise ValueError("; ".join(str(d) for d in problems))
    rel = Path(slug(query)) / str(seed)
    final = root / rel
    tmp = root / (str(rel) + ".partial")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir(parents=True)
    try:
        cams = parse_rig(rig)(p, seed, resolution)
        rs = render_views(p, cams, random_light_rig(seed), modes, jobs=jobs)
        renders: dict[str, list[str]] = {m: [] for m in modes}
        sidecars: list[str] = []
        for i, cam in enumerate(cams):
            for mode in modes:
                view = rs.views[i * len(modes) + modes.index(mode)]
                name = f"view_{i}_{mode}.png"
                written = write_image(tmp / name, mode, view.pixels, p.labels)
                renders[mode].append(str(rel / name))
                sidecars.extend(str(rel / w.name) for w in written[1:])
        (tmp / "program.psc").write_text(serialize_program(p), encoding="utf-8")
        write_camera_metadata(tmp / "cameras.json", cams, seed, {"rig": rig, "lights": rs.lights.to_dict()})
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if final.exists():
        shutil.rmtree(final)
    tmp.rename(final)
    return CorpusEntry(query, seed, str(rel / "program.psc"), renders, str(rel / "cameras.json"), sidecars)


def render_corpus(
    programs,
    rig: str = "icosphere:0",
    modes=("shaded",),
    out_dir: str | Path = "corpus",
    *,
    seed: int = 0,
    resolution: tuple[int, int] = (384, 384),
    jobs: int = 1,
) -> CorpusManifest:
    """Render every ``(query, program[, seed])`` under ``out_dir/<query>/<seed>/``.

    Each program's files appear all together or not at all; a program that
    fails is recorded as a :class:`RenderFailure` and the rest continue. The
    manifest is written last.
    """
    programs = list(programs)
    if not programs:
        raise ValueError("no programs to render")
    modes = tuple(dict.fromkeys(modes))
    bad = [m for m in modes if m not in MODES]
    if bad:
        raise ValueError(f"unknown modes {bad}")
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    entries, failures, seen = [], [], set()
    for item in programs:
        query, p = item[0], item[1]
        s = int(item[2]) if len(item) > 2 else seed
        if (query, s) in seen:
            raise ValueError(f"duplicate corpus entry ({query!r}, {s})")
        seen.add((query, s))
        try:
            entries.append(_render_one(query, s, p, rig, modes, root, resolution, jobs))
        except Exception as exc:  # one bad program must not sink the corpus
            log.warning("rendering %r failed: %s", query, exc)
            failures.append(RenderFailure(query, s, f"{type(exc).__name__}: {exc}"))
    config = {"rig": rig, "modes": list(modes), "seed": seed, "resolution": list(resolution)}
    manifest = CorpusManifest(entries, failures, config)
    (root / MANIFEST).write_text(json.dumps(manifest.to_dict(), indent=2), encoding="utf-8")
    return manifest


def scan_files(out_dir: str | Path) -> set[str]:
    root = Path(out_dir)
    return {str(p.relative_to(root)) for p in root.rglob("*") if p.is_file()}
