"""Token accounting over pipeline run directories."""

from __future__ import annotations

import json
from pathlib import Path


class MissingTranscript(FileNotFoundError):
    pass


def entry_tokens(entry: dict) -> tuple[int, bool]:
    """(tokens, exact) for one transcript entry.

    Provider-reported usage is used when present; otherwise prompt and reply
    are counted as whitespace-separated words and the count is approximate.
    """
    usage = entry.get("usage")
    if isinstance(usage, dict):
        if "total_tokens" in usage:
            return int(usage["total_tokens"]), True
        if "prompt_tokens" in usage or "completion_tokens" in usage:
            return int(usage.get("prompt_tokens", 0)) + int(usage.get("completion_tokens", 0)), True
    request = entry.get("request") or {}
    words = sum(len(m.get("text", "").split()) for m in request.get("messages", []))
    words += len((entry.get("response") or "").split())
    return words, False


def count_images(run_dir: Path) -> int:
    return sum(1 for _ in run_dir.glob("iter_*/view_*.png"))


def summarize_run(run_dir: str | Path) -> dict:
    run_dir = Path(run_dir)
    path = run_dir / "transcript.jsonl"
    if not path.is_file():
        raise MissingTranscript(f"{run_dir} has no transcript.jsonl")
    total, approximate, calls = 0, False, 0
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        n, exact = entry_tokens(json.loads(line))
        total += n
        approximate |= not exact
        calls += 1
    query = None
    run_json = run_dir / "run.json"
    if run_json.is_file():
        query = json.loads(run_json.read_text(encoding="utf-8")).get("query")
    images = count_images(run_dir)
    return {
        "run": str(run_dir),
        "query": query,
        "calls": calls,
        "tokens": total,
        "images": images,
        "tokens_per_image": total / images if images else None,
        "approximate": approximate,
    }


def summarize_tokens(run_dirs) -> dict:
    """Per-run, per-query and overall token totals, and tokens per generated image."""
    runs = [summarize_run(d) for d in run_dirs]
    if not runs:
        raise MissingTranscript("no run directories given")
    per_query: dict[str, dict] = {}
    for r in runs:
        q = per_query.setdefault(r["query"] or r["run"], {"tokens": 0, "images": 0, "approximate": False})
        q["tokens"] += r["tokens"]
        q["images"] += r["images"]
        q["approximate"] |= r["approximate"]
    for q in per_query.values():
        q["tokens_per_image"] = q["tokens"] / q["images"] if q["images"] else None
    tokens = sum(r["tokens"] for r in runs)
    images = sum(r["images"] for r in runs)
    return {
        "runs": runs,
        "per_query": per_query,
        "tokens": tokens,
        "images": images,
        "tokens_per_image": tokens / images if images else None,
        "approximate": any(r["approximate"] for r in runs),
    }
