"""Value types passed between the designer, coder and inspector stages."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..mllm import DEFAULT_MODEL, DEFAULT_TEMPERATURE
from ..render import RenderSet
from ..scene_lang import Diagnostic, SceneProgram

AGENTS = ("designer", "coder", "inspector")
EDIT_TYPES = ("add", "remove", "delete", "move", "rotate", "stretch", "scale")
STOP_REASONS = ("identified", "budget_exhausted", "no_inspector")
MAX_CANVAS = 1000.0  # metres
MAX_EDITS = 5


class DesignerError(ValueError):
    pass


class ImplausibleDims(DesignerError):
    pass


class LengthMismatch(DesignerError):
    pass


class CountMismatch(DesignerError):
    pass


class MissingField(DesignerError):
    def __init__(self, part: str, field_name: str):
        self.part = part
        self.field = field_name
        super().__init__(f"part {part!r} is missing field {field_name!r}")


@dataclass(frozen=True)
class Query:
    text: str

    def __post_init__(self):
        t = str(self.text).strip()
        if not t:
            raise ValueError("query must be non-empty")
        object.__setattr__(self, "text", t)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Canvas:
    """Overall (length, width, height) in metres."""

    dims: tuple[float, float, float]

    def __post_init__(self):
        d = tuple(float(v) for v in self.dims)
        if len(d) != 3:
            raise ImplausibleDims(f"canvas needs 3 values, got {len(d)}")
        if not all(math.isfinite(v) and 0.0 < v < MAX_CANVAS for v in d):
            raise ImplausibleDims(f"canvas {list(d)} must lie in (0, {MAX_CANVAS:g}) m per axis")
        object.__setattr__(self, "dims", d)


@dataclass(frozen=True)
class PartDecomposition:
    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        e = tuple((str(l), int(c)) for l, c in self.entries)
        if not e:
            raise ValueError("decomposition needs at least one part")
        labels = [l for l, _ in e]
        if len(set(labels)) != len(labels):
            raise ValueError("part labels must be unique")
        if any(c < 1 for _, c in e):
            raise ValueError("part counts must be >= 1")
        object.__setattr__(self, "entries", e)

    @property
    def labels(self) -> list[str]:
        return [l for l, _ in self.entries]

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.entries]

    @property
    def n_instances(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class Edit:
    aspect: str  # the part or visual feature concerned
    edit_type: str
    command: str

    def __post_init__(self):
        for name in ("aspect", "edit_type", "command"):
            v = str(getattr(self, name)).strip()
            if not v:
                raise ValueError(f"edit field {name!r} is empty")
            object.__setattr__(self, name, v)

    def to_dict(self) -> dict:
        return {"visual_aspect": self.aspect, "edit_type": self.edit_type, "command": self.command}


@dataclass(frozen=True)
class EditSet:
    edits: tuple[Edit, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()

    def __len__(self) -> int:
        return len(self.edits)

    def __iter__(self):
        return iter(self.edits)


@dataclass(frozen=True)
class PipelineConfig:
    budget: int = 3
    views_per_iteration: int = 3
    max_parts: int = 8
    top_p_predictions: int = 3
    temperature: float = DEFAULT_TEMPERATURE
    agents: frozenset = frozenset(AGENTS)
    language: str = "protoscene"
    seed: int = 0
    model_id: str = DEFAULT_MODEL
    max_retries: int = 2
    retry_pause: float = 1.0
    proposal_mode: str = "deterministic"  # or "mllm"
    match_mode: str = "any"  # or "top1"
    strict: bool = False  # designer inconsistencies raise instead of warning
    resolution: tuple[int, int] = (384, 384)
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "agents", frozenset(self.agents))
        object.__setattr__(self, "resolution", tuple(int(v) for v in self.resolution))
        unknown = self.agents - set(AGENTS)
        if unknown:
            raise ValueError(f"unknown agents {sorted(unknown)}")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.views_per_iteration < 1:
            raise ValueError("views_per_iteration must be >= 1")
        if self.max_parts < 1:
            raise ValueError("max_parts must be >= 1")
        if self.top_p_predictions < 1:
            raise ValueError("top_p_predictions must be >= 1")
        if "inspector" in self.agents and "coder" not in self.agents:
            raise ValueError("the inspector agent requires the coder agent")
        if self.language != "protoscene":
            raise ValueError("the only supported language is 'protoscene'")
        if self.proposal_mode not in ("deterministic", "mllm"):
            raise ValueError("proposal_mode must be 'deterministic' or 'mllm'")
        if self.match_mode not in ("any", "top1"):
            raise ValueError("match_mode must be 'any' or 'top1'")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass
class IterationRecord:
    iteration: int
    program: SceneProgram
    renders: RenderSet | None = None
    predictions: list[str] = field(default_factory=list)
    edits: EditSet | None = None  # recommendations drawn from this iteration's renders
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass
class PipelineResult:
    query: str
    program: SceneProgram
    iterations: list[IterationRecord]
    stop_reason: str
    canvas: Canvas | None = None
    decomposition: PartDecomposition | None = None
    arrangement: object = None
    coarse_program: SceneProgram | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    transcript: object = None

    @property
    def refinements(self) -> int:
        """Refine-and-inspect rounds run after the first program."""
        return max(0, len(self.iterations) - 1)
