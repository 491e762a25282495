"""Tokenizer and recursive-descent parser for ProtoScene source text.

Grammar::

    program   := { stmt } ;
    stmt      := "canvas" vec3 | part ;
    part      := "part" STRING "{" kind "pos" vec3 "rot" vec3 [ "rgb" vec3 ] "}" ;
    kind      := "cuboid" "dims" vec3 | "cylinder" NUM NUM | "sphere" NUM
               | "cone" NUM NUM | "torus" NUM NUM ;
    vec3      := "[" NUM "," NUM "," NUM "]" ;

``#`` starts a comment running to end of line. A program must contain at
least one part.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .model import (
    Cone,
    Cuboid,
    Cylinder,
    Material,
    PartNode,
    Pose,
    SceneProgram,
    Sphere,
    Torus,
)


class SceneSyntaxError(ValueError):
    """Positioned parse failure. Every rejection from :func:`parse_program` is one of these."""

    def __init__(self, message: str, line: int, column: int, expected: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        self.detail = message
        super().__init__(f"line {line}, column {column}: {message}")


class DuplicateLabel(SceneSyntaxError):
    pass


class NonPositiveDimension(SceneSyntaxError):
    pass


class NonFiniteValue(SceneSyntaxError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[\[\]{},])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    type: str  # num | word | string | punct | eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            ch = text[pos]
            if ch == '"':
                raise SceneSyntaxError("unterminated string", line, col, expected='closing "')
            raise SceneSyntaxError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unescape(raw: str) -> str:
    body = raw[1:-1]
    return re.sub(r"\\(.)", r"\1", body)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def _fail(self, expected: str, tok: Token | None = None) -> SceneSyntaxError:
        tok = tok or self.cur
        got = "end of input" if tok.type == "eof" else repr(tok.text)
        return SceneSyntaxError(f"expected {expected}, got {got}", tok.line, tok.column, expected)

    def _expect_word(self, word: str) -> Token:
        tok = self.cur
        if tok.type != "word" or tok.text != word:
            raise self._fail(f"'{word}'")
        self.i += 1
        return tok

    def _expect_punct(self, p: str) -> Token:
        tok = self.cur
        if tok.type != "punct" or tok.text != p:
            raise self._fail(f"'{p}'")
        self.i += 1
        return tok

    def _num(self) -> tuple[float, Token]:
        tok = self.cur
        if tok.type != "num":
            raise self._fail("number")
        self.i += 1
        value = float(tok.text)
        if not math.isfinite(value):
            raise NonFiniteValue(f"number {tok.text} is not finite", tok.line, tok.column)
        return value, tok

    def _positive(self, what: str) -> float:
        value, tok = self._num()
        if value <= 0:
            raise NonPositiveDimension(f"{what} must be > 0, got {tok.text}", tok.line, tok.column)
        return value

    def _vec3(self) -> tuple[tuple[float, float, float], list[Token]]:
        self._expect_punct("[")
        vals, toks = [], []
        for k in range(3):
            v, t = self._num()
            vals.append(v)
            toks.append(t)
            if k < 2:
                self._expect_punct(",")
        self._expect_punct("]")
        return (vals[0], vals[1], vals[2]), toks

    def _positive_vec3(self, what: str):
        vec, toks = self._vec3()
        for axis, v, t in zip("xyz", vec, toks):
            if v <= 0:
                raise NonPositiveDimension(f"{what}.{axis} must be > 0, got {t.text}", t.line, t.column)
        return vec

    def _kind(self):
        tok = self.cur
        if tok.type != "word" or tok.text not in ("cuboid", "cylinder", "sphere", "cone", "torus"):
            raise self._fail("primitive kind (cuboid|cylinder|sphere|cone|torus)")
        self.i += 1
        if tok.text == "cuboid":
            self._expect_word("dims")
            return Cuboid(self._positive_vec3("dims"))
        if tok.text == "sphere":
            return Sphere(self._positive("radius"))
        if tok.text == "cylinder":
            return Cylinder(self._positive("radius"), self._positive("height"))
        if tok.text == "cone":
            return Cone(self._positive("radius"), self._positive("height"))
        return Torus(self._positive("major_radius"), self._positive("minor_radius"))

    def _part(self) -> tuple[PartNode, Token]:
        self._expect_word("part")
        tok = self.cur
        if tok.type != "string":
            raise self._fail("quoted part label")
        self.i += 1
        label = _unescape(tok.text)
        if not label.strip():
            raise SceneSyntaxError("part label must be non-empty", tok.line, tok.column, "non-empty label")
        self._expect_punct("{")
        kind = self._kind()
        self._expect_word("pos")
        pos, _ = self._vec3()
        self._expect_word("rot")
        rot, _ = self._vec3()
        material = Material()
        has_rgb = False
        if self.cur.type == "word" and self.cur.text == "rgb":
            has_rgb = True
            self.i += 1
            rgb, toks = self._vec3()
            for ch, v, t in zip("rgb", rgb, toks):
                if not 0.0 <= v <= 1.0:
                    raise SceneSyntaxError(f"albedo.{ch} must lie in [0, 1], got {t.text}", t.line, t.column, "value in [0, 1]")
            material = Material(rgb)
        if not (self.cur.type == "punct" and self.cur.text == "}"):
            raise self._fail("'}'" if has_rgb else "'rgb' or '}'")
        self.i += 1
        return PartNode(label, kind, Pose(pos, rot), material), tok

    def program(self) -> SceneProgram:
        parts: list[PartNode] = []
        seen: set[str] = set()
        canvas = None
        while self.cur.type != "eof":
            tok = self.cur
            if tok.type == "word" and tok.text == "canvas":
                if canvas is not None:
                    raise SceneSyntaxError("canvas declared twice", tok.line, tok.column, "single canvas statement")
                self.i += 1
                canvas = self._positive_vec3("canvas")
            elif tok.type == "word" and tok.text == "part":
                node, label_tok = self._part()
                if node.label in seen:
                    raise DuplicateLabel(f"duplicate part label {node.label!r}", label_tok.line, label_tok.column)
                seen.add(node.label)
                parts.append(node)
            else:
                raise self._fail("'canvas' or 'part'")
        if not parts:
            raise self._fail("'part'")
        return SceneProgram(tuple(parts), canvas)


def parse_program(text: str) -> SceneProgram:
    """Parse ProtoScene source. Raises :class:`SceneSyntaxError` (or a subclass) on any failure."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SceneSyntaxError(f"input is not UTF-8: {exc.reason}", 1, 1) from None
    return _Parser(text).program()
