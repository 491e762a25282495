"""Corpus rendering, Dirichlet mixup expansion and token accounting."""

from .corpus import CorpusEntry, CorpusManifest, RenderFailure, render_corpus, scan_files, slug
from .mixup import (
    EmptySource,
    MixItem,
    MixupConfig,
    WriteFailure,
    blend,
    list_images,
    load_resized,
    mixup_expand,
    plan_mixup,
)
from .tokens import MissingTranscript, entry_tokens, summarize_run, summarize_tokens

__all__ = [
    "CorpusEntry",
    "CorpusManifest",
    "EmptySource",
    "MissingTranscript",
    "MixItem",
    "MixupConfig",
    "RenderFailure",
    "WriteFailure",
    "blend",
    "entry_tokens",
    "list_images",
    "load_resized",
    "mixup_expand",
    "plan_mixup",
    "render_corpus",
    "scan_files",
    "slug",
    "summarize_run",
    "summarize_tokens",
]
