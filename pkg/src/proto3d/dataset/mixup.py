"""Two-image Dirichlet mixup for expanding a rendered corpus into a pretraining set."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..render.io import rgb_to_uint8

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
# depth and mask renders are not photographs; leave them out of the blend pool
EXCLUDED_SUFFIXES = ("_depth.png", "_mask.png")


class EmptySource(ValueError):
    pass


class WriteFailure(OSError):
    pass


@dataclass(frozen=True)
class MixupConfig:
    sources: tuple[tuple[str, float], ...]  # (image directory, selection probability)
    n_out: int = 10_000
    resolution: tuple[int, int] = (384, 384)  # (width, height)
    dirichlet_alpha: float = 1.0
    seed: int = 0
    forced_weights: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple((str(d), float(p)) for d, p in self.sources))
        if not self.sources:
            raise ValueError("need at least one source")
        probs = [p for _, p in self.sources]
        if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
            raise ValueError(f"source probabilities must be non-negative and sum to 1, got {probs}")
        if self.n_out < 1:
            raise ValueError("n_out must be >= 1")
        if not self.dirichlet_alpha > 0:
            raise ValueError("dirichlet_alpha must be positive")
        if self.forced_weights is not None:
            w1, w2 = self.forced_weights
            if w1 < 0 or w2 < 0 or not math.isclose(w1 + w2, 1.0, abs_tol=1e-12):
                raise ValueError("forced weights must be non-negative and sum to 1")


@dataclass(frozen=True)
class MixItem:
    index: int
    first: tuple[int, int]  # (source index, file index)
    second: tuple[int, int]
    w1: float

    @property
    def w2(self) -> float:
        return 1.0 - self.w1


def list_images(directory: str | Path) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise EmptySource(f"{root} is not a directory")
    files = sorted(
        p for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES and not p.name.endswith(EXCLUDED_SUFFIXES)
    )
    if not files:
        raise EmptySource(f"{root} holds no images")
    return files


def plan_mixup(cfg: MixupConfig, source_sizes: list[int]) -> list[MixItem]:
    """Draw every output's two inputs and blend weight up front, from one seeded stream."""
    if len(source_sizes) != len(cfg.sources):
        raise ValueError("one size per source expected")
    if any(n < 1 for n in source_sizes):
        raise EmptySource("every source needs at least one image")
    rng = np.random.default_rng(cfg.seed)
    probs = np.array([p for _, p in cfg.sources])
    probs = probs / probs.sum()
    items = []
    for i in range(cfg.n_out):
        picks = []
        for _ in range(2):
            s = int(rng.choice(len(probs), p=probs))
            picks.append((s, int(rng.integers(source_sizes[s]))))
        w = rng.dirichlet([cfg.dirichlet_alpha, cfg.dirichlet_alpha])
        w1 = cfg.forced_weights[0] if cfg.forced_weights is not None else float(w[0])
        items.append(MixItem(i, picks[0], picks[1], w1))
    return items


def load_resized(path: Path, resolution: tuple[int, int]) -> np.ndarray:
    with Image.open(path) as im:
        im = im.convert("RGB")
        if im.size != tuple(resolution):
            im = im.resize(tuple(resolution), Image.BILINEAR)
        return np.asarray(im, dtype=float) / 255.0


def blend(a: np.ndarray, b: np.ndarray, w1: float) -> np.ndarray:
    return w1 * a + (1.0 - w1) * b


def output_name(i: int) -> str:
    return f"mix_{i:07d}.png"


def mixup_expand(cfg: MixupConfig, out_dir: str | Path, *, jobs: int = 1) -> dict:
    """Write ``cfg.n_out`` blended images plus ``mixup.json``; returns the manifest."""
    files = [list_images(d) for d, _ in cfg.sources]
    plan = plan_mixup(cfg, [len(f) for f in files])
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WriteFailure(f"cannot create {out}: {exc}") from exc

    def make(item: MixItem) -> None:
        a = load_resized(files[item.first[0]][item.first[1]], cfg.resolution)
        b = load_resized(files[item.second[0]][item.second[1]], cfg.resolution)
        try:
            Image.fromarray(rgb_to_uint8(blend(a, b, item.w1))).save(out / output_name(item.index))
        except OSError as exc:
            raise WriteFailure(f"cannot write output {item.index}: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(make, plan))
    else:
        for item in plan:
            make(item)

    manifest = {
        "config": {
            "sources": [list(s) for s in cfg.sources],
            "n_out": cfg.n_out,
            "resolution": list(cfg.resolution),
            "dirichlet_alpha": cfg.dirichlet_alpha,
            "seed": cfg.seed,
            "forced_weights": list(cfg.forced_weights) if cfg.forced_weights else None,
        },
        "items": [
            {
                "output": output_name(it.index),
                "first": str(files[it.first[0]][it.first[1]]),
                "second": str(files[it.second[0]][it.second[1]]),
                "w1": it.w1,
                "w2": it.w2,
            }
            for it in plan
        ],
    }
    (out / "mixup.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest
