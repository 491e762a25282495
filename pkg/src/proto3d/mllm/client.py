"""Chat requests, backends (fixture mock and HTTP chat-completions), retries and transcripts."""

from __future__ import annotations

import base64
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Protocol

import httpx

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o-2024-08-06"
DEFAULT_TEMPERATURE = 0.2
MAX_IMAGES = 3
ROLES = ("system", "user", "assistant")


class MLLMError(Exception):
    pass


class BackendError(MLLMError):
    """A failed call that is worth resubmitting."""


class TransportError(BackendError):
    pass


class RateLimited(BackendError):
    pass


class FixtureMissing(MLLMError):
    pass


class BackendExhausted(MLLMError):
    def __init__(self, attempts: int, last_error: Exception | None):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(f"backend failed {attempts} time(s); last error: {last_error}")


@dataclass(frozen=True)
class Message:
    role: str
    text: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")


@dataclass(frozen=True)
class RequestTag:
    """Which agent module issued a request; used for fixture lookup and logging only."""

    module: str
    query: str
    iteration: int = 0
    attempt: int = 0


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[Message, ...]
    images: tuple[bytes, ...] = ()  # PNG-encoded
    temperature: float = DEFAULT_TEMPERATURE
    model_id: str = DEFAULT_MODEL
    max_tokens: int = 4096
    tag: RequestTag | None = None

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "images", tuple(self.images))
        if not self.messages:
            raise ValueError("a request needs at least one message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if len(self.images) > MAX_IMAGES:
            raise ValueError(f"at most {MAX_IMAGES} images per request")

    @classmethod
    def simple(cls, prompt: str, *, system: str | None = None, **kw) -> ChatRequest:
        msgs = ([Message("system", system)] if system else []) + [Message("user", prompt)]
        return cls(tuple(msgs), **kw)

    def prompt_text(self) -> str:
        return "\n".join(m.text for m in self.messages)

    def to_log(self) -> dict:
        d = {
            "messages": [{"role": m.role, "text": m.text} for m in self.messages],
            "n_images": len(self.images),
            "temperature": self.temperature,
            "model": self.model_id,
        }
        if self.tag:
            d.update(module=self.tag.module, query=self.tag.query, iteration=self.tag.iteration, attempt=self.tag.attempt)
        return d


@dataclass(frozen=True)
class Completion:
    text: str
    usage: dict | None = None  # provider token counts, when reported


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> Completion: ...


class MockBackend:
    """Replays canned responses keyed on (module, query, iteration[, attempt]).

    Entries without an ``attempt`` field answer every attempt; an entry with
    one takes precedence for that attempt only. Unknown keys raise
    :class:`FixtureMissing`; there is no default answer.
    """

    def __init__(self, entries: list[dict]):
        self._exact: dict[tuple, dict] = {}
        self._any: dict[tuple, dict] = {}
        for e in entries:
            key = (e["module"], _norm_query(e["query"]), int(e.get("iteration", 0)))
            if "attempt" in e:
                self._exact[key + (int(e["attempt"]),)] = e
            else:
                self._any[key] = e
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> MockBackend:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValueError(f"{path}: fixture file must be a JSON array")
        return cls(data)

    def complete(self, request: ChatRequest) -> Completion:
        with self._lock:
            self.calls += 1
        tag = request.tag
        if tag is None:
            raise FixtureMissing("mock backend needs a tagged request")
        key = (tag.module, _norm_query(tag.query), tag.iteration)
        entry = self._exact.get(key + (tag.attempt,)) or self._any.get(key)
        if entry is None:
            raise FixtureMissing(f"no fixture for module={tag.module!r} query={tag.query!r} iteration={tag.iteration}")
        return Completion(entry["response"], entry.get("usage"))


def _norm_query(q: str) -> str:
    return q.strip()


class LiveBackend:
    """OpenAI-style ``/chat/completions`` client.

    Configuration comes from arguments or the environment:
    ``PROTO3D_API_BASE``, ``PROTO3D_API_KEY`` (falls back to ``OPENAI_API_KEY``)
    and ``PROTO3D_MODEL``.
    """

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        model_id: str | None = None,
        *,
        max_in_flight: int = 4,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = (base_url or os.environ.get("PROTO3D_API_BASE") or "https://api.openai.com/v1").rstrip("/")
        self.api_key = api_key or os.environ.get("PROTO3D_API_KEY") or os.environ.get("OPENAI_API_KEY")
        self.model_id = model_id or os.environ.get("PROTO3D_MODEL") or DEFAULT_MODEL
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def payload(self, request: ChatRequest) -> dict:
        msgs = [{"role": m.role, "content": m.text} for m in request.messages]
        if request.images:
            last_user = max(i for i, m in enumerate(request.messages) if m.role == "user")
            parts = [{"type": "text", "text": request.messages[last_user].text}]
            for img in request.images:
                url = "data:image/png;base64," + base64.b64encode(img).decode("ascii")
                parts.append({"type": "image_url", "image_url": {"url": url}})
            msgs[last_user] = {"role": "user", "content": parts}
        model = request.model_id if request.model_id != DEFAULT_MODEL else self.model_id
        return {
            "model": model,
            "messages": msgs,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }

    def complete(self, request: ChatRequest) -> Completion:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        with self._slots:
            try:
                resp = self._client.post(f"{self.base_url}/chat/completions", json=self.payload(request), headers=headers)
            except httpx.HTTPError as exc:
                raise TransportError(str(exc)) from exc
        if resp.status_code == 429:
            raise RateLimited(resp.text[:200])
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response body: {exc}") from exc
        return Completion(text or "", body.get("usage"))

    def close(self) -> None:
        self._client.close()


class Transcript:
    """Append-only, thread-safe log of every backend attempt."""

    def __init__(self):
        self._entries: list[dict] = []
        self._lock = threading.Lock()

    def record(self, request: ChatRequest, attempt: int, completion: Completion | None = None, error: Exception | None = None) -> None:
        entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "retry_index": attempt,
            "request": request.to_log(),
            "response": completion.text if completion else None,
            "usage": completion.usage if completion else None,
            "error": f"{type(error).__name__}: {error}" if error else None,
        }
        with self._lock:
            self._entries.append(entry)

    @property
    def entries(self) -> list[dict]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for e in self.entries:
                fh.write(json.dumps(e) + "\n")


def complete_with_retries(
    backend: Backend,
    request: ChatRequest,
    max_retries: int = 2,
    *,
    transcript: Transcript | None = None,
    pause: float = 1.0,
) -> str:
    """Send ``request``, resubmitting it verbatim after retryable failures.

    Raises :class:`BackendExhausted` after ``max_retries + 1`` failed attempts.
    Non-retryable errors (e.g. a missing fixture) propagate immediately.
    """
    if max_retries < 0:
        raise ValueError("max_retries must be >= 0")
    last: Exception | None = None
    for attempt in range(max_retries + 1):
        if attempt and pause > 0:
            time.sleep(pause)
        try:
            completion = backend.complete(request)
        except BackendError as exc:
            last = exc
            log.warning("backend attempt %d failed: %s", attempt + 1, exc)
            if transcript is not None:
                transcript.record(request, attempt, error=exc)
            continue
        except MLLMError as exc:
            if transcript is not None:
                transcript.record(request, attempt, error=exc)
            raise
        if transcript is not None:
            transcript.record(request, attempt, completion)
        return completion.text
    raise BackendExhausted(max_retries + 1, last)
