"""Image and metadata files: 8-bit RGB, 16-bit millimetre depth, 8-bit part masks."""

from __future__ import annotations

import json
from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image

from .camera import Camera

DEPTH_SCALE = 1000.0  # stored units per metre


def rgb_to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(img) * 255.0), 0, 255).astype(np.uint8)


def encode_depth(depth: np.ndarray) -> np.ndarray:
    d = np.asarray(depth, dtype=float)
    out = np.zeros(d.shape, dtype=np.uint16)
    finite = np.isfinite(d) & (d > 0)
    out[finite] = np.clip(np.round(d[finite] * DEPTH_SCALE), 0, 65535).astype(np.uint16)
    return out


def decode_depth(raw: np.ndarray) -> np.ndarray:
    raw = np.asarray(raw)
    return np.where(raw == 0, np.inf, raw.astype(float) / DEPTH_SCALE)


def write_rgb(path: str | Path, img: np.ndarray) -> None:
    Image.fromarray(rgb_to_uint8(img)).save(path)


def write_depth(path: str | Path, depth: np.ndarray) -> None:
    Image.fromarray(encode_depth(depth)).save(path)


def read_depth(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return decode_depth(np.array(im, dtype=np.uint16))


def mask_legend(labels) -> dict[str, str]:
    legend = {"0": "background"}
    legend.update({str(i + 1): label for i, label in enumerate(labels)})
    return legend


def write_mask(path: str | Path, mask: np.ndarray, labels) -> Path:
    """Write the mask PNG plus its ``<stem>.json`` label sidecar; returns the sidecar path."""
    path = Path(path)
    Image.fromarray(np.asarray(mask, dtype=np.uint8)).save(path)
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(mask_legend(labels), indent=2))
    return sidecar


def write_image(path: str | Path, mode: str, pixels: np.ndarray, labels=()) -> list[Path]:
    """Write one rendered buffer in its mode's file format; returns every file written."""
    path = Path(path)
    if mode in ("shaded", "albedo"):
        write_rgb(path, pixels)
        return [path]
    if mode == "depth":
        write_depth(path, pixels)
        return [path]
    if mode == "mask":
        return [path, write_mask(path, pixels, labels)]
    raise ValueError(f"unknown mode {mode!r}")


def png_bytes(img: np.ndarray) -> bytes:
    buf = BytesIO()
    Image.fromarray(rgb_to_uint8(img)).save(buf, format="PNG")
    return buf.getvalue()


def camera_metadata(cameras: list[Camera], seed: int | None, extra: dict | None = None) -> dict:
    meta = {"seed": seed, "cameras": [c.to_dict() for c in cameras]}
    if extra:
        meta.update(extra)
    return meta


def write_camera_metadata(path: str | Path, cameras: list[Camera], seed: int | None, extra: dict | None = None) -> None:
    Path(path).write_text(json.dumps(camera_metadata(cameras, seed, extra), indent=2))
