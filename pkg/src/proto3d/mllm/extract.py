"""Lenient extraction of structured values from free-form model responses.

Every extractor either returns a value or raises a subclass of
:class:`ExtractionError`; none of them let an unexpected exception escape.
"""

from __future__ import annotations

import ast
import json
import re

from .client import MLLMError


class ExtractionError(MLLMError, ValueError):
    pass


class MalformedResponse(ExtractionError):
    """A response that parsed but does not fit the shape the caller asked for."""


class NoListFound(ExtractionError):
    pass


class UnterminatedString(ExtractionError):
    pass


class NotNumeric(ExtractionError):
    pass


class NoJsonFound(ExtractionError):
    pass


class JsonSyntax(ExtractionError):
    pass


_FENCE_RE = re.compile(r"```[ \t]*([A-Za-z0-9_+.-]*)[^\n]*\n(.*?)```", re.DOTALL)
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
# opening quote -> accepted closing quotes (LaTeX-style `word' is tolerated)
_QUOTES = {"'": "'", '"': '"', "`": "`'", "‘": "’'", "“": "”\""}


def extract_code_block(response: str, language_tag: str | None = None) -> str:
    """Body of the first fenced block (with matching tag, if given); the whole text when unfenced."""
    for m in _FENCE_RE.finditer(response):
        if language_tag is None or m.group(1).lower() == language_tag.lower():
            return m.group(2)
    if language_tag is not None:
        m = _FENCE_RE.search(response)
        if m:
            return m.group(2)
    return response


def _scan_string(text: str, i: int) -> tuple[str, int]:
    """Read a quoted string starting at ``text[i]``; returns (value, index after close)."""
    closers = _QUOTES[text[i]]
    out = []
    j = i + 1
    while j < len(text):
        ch = text[j]
        if ch == "\\" and j + 1 < len(text):
            out.append(text[j + 1])
            j += 2
            continue
        if ch in closers:
            return "".join(out), j + 1
        if ch == "\n":
            break
        out.append(ch)
        j += 1
    raise UnterminatedString(f"string opened at offset {i} is never closed")


def _try_string_list(text: str, start: int) -> list[str] | None:
    """Parse ``[ 'a', 'b' ]`` at ``start``; None if the bracket is not a string list."""
    i = start + 1
    items: list[str] = []
    n = len(text)

    def skip_ws(k: int) -> int:
        while k < n and text[k] in " \t\r\n":
            k += 1
        return k

    i = skip_ws(i)
    if i < n and text[i] == "]":
        return items
    while i < n:
        if text[i] not in _QUOTES:
            return None
        value, i = _scan_string(text, i)
        items.append(value)
        i = skip_ws(i)
        if i < n and text[i] == ",":
            i = skip_ws(i + 1)
            if i < n and text[i] == "]":
                return items
            continue
        if i < n and text[i] == "]":
            return items
        return None
    return None


def extract_list(response: str) -> list[str]:
    """First bracketed list of quoted strings in the response, order preserved."""
    pending: UnterminatedString | None = None
    for m in re.finditer(r"\[", response):
        try:
            items = _try_string_list(response, m.start())
        except UnterminatedString as exc:
            pending = pending or exc
            continue
        if items is not None:
            return items
    if pending is not None:
        raise pending
    raise NoListFound("no bracketed list of quoted strings in response")


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def extract_numeric_list(response: str) -> list[float]:
    """First bracketed list in the response, every element a number. ``#`` comments are ignored."""
    text = _strip_comments(response)
    m = re.search(r"\[([^\[\]]*)\]", text)
    if m is None:
        raise NoListFound("no bracketed list in response")
    body = m.group(1).strip()
    if not body:
        return []
    values = []
    for item in body.split(","):
        item = item.strip()
        if not _NUMBER_RE.fullmatch(item):
            raise NotNumeric(f"list element {item!r} is not a number")
        values.append(float(item))
    return values


def _strip_trailing_commas(s: str) -> str:
    return re.sub(r",(\s*[}\]])", r"\1", s)


def extract_json(response: str):
    """First JSON object in the response, whether or not it sits in a fenced block.

    Trailing commas (a common model slip) are tolerated.
    """
    decoder = json.JSONDecoder()
    first_error: json.JSONDecodeError | None = None
    for m in re.finditer(r"\{", response):
        chunk = response[m.start():]
        try:
            value, _ = decoder.raw_decode(chunk)
            return value
        except json.JSONDecodeError as exc:
            try:
                value, _ = decoder.raw_decode(_strip_trailing_commas(chunk))
                return value
            except json.JSONDecodeError:
                pass
            first_error = first_error or exc
    if first_error is not None:
        raise JsonSyntax(f"invalid JSON object: {first_error.msg} at offset {first_error.pos}")
    raise NoJsonFound("no JSON object in response")


def _matching_bracket(text: str, start: int) -> int | None:
    depth = 0
    quote = None
    i = start
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch in "[{(":
            depth += 1
        elif ch in "]})":
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return None


def extract_dict_list(response: str) -> list[dict]:
    """First bracketed list of dictionaries, written as JSON or as a Python literal."""
    saw_bracket = False
    for m in re.finditer(r"\[", response):
        end = _matching_bracket(response, m.start())
        if end is None:
            continue
        saw_bracket = True
        chunk = response[m.start(): end + 1]
        value = None
        for parse in (json.loads, lambda s: json.loads(_strip_trailing_commas(s)), ast.literal_eval):
            try:
                value = parse(chunk)
                break
            except (ValueError, SyntaxError, TypeError, MemoryError, RecursionError):
                continue
        if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            return value
        if isinstance(value, list) and not value:
            return []
    if saw_bracket:
        raise NoListFound("no bracketed list of dictionaries in response")
    raise NoListFound("no bracketed list in response")
