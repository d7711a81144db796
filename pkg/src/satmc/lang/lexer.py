"""Tokenizer shared by the model and property languages."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from ..errors import ParseError

KEYWORDS = frozenset(
    {
        "module",
        "endmodule",
        "const",
        "int",
        "double",
        "bool",
        "global",
        "init",
        "rewards",
        "endrewards",
        "label",
        "true",
        "false",
        "ctmc",
        "stochastic",
    }
)

# Order matters: longer operators first.
_TOKEN_SPEC = [
    ("WS", r"[ \t\r\f\v]+"),
    ("NEWLINE", r"\n"),
    ("COMMENT", r"//[^\n]*"),
    ("NUMBER", r"\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+"),
    ("PRIMED", r"[A-Za-z_][A-Za-z0-9_]*'"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("STRING", r'"[^"\n]*"'),
    (
        "OP",
        r"->|=>|<=>|<=|>=|!=|=\?|\.\.|[=<>&|!+\-*/()\[\]{},;:?]",
    ),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, IDENT, PRIMED, STRING, KEYWORD, OP, EOF
    text: str
    line: int
    column: int


def tokenize(source: str) -> Iterator[Token]:
    line = 1
    line_start = 0
    pos = 0
    n = len(source)
    while pos < n:
        match = _MASTER.match(source, pos)
        if match is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        text = match.group()
        column = pos - line_start + 1
        pos = match.end()
        if kind == "NEWLINE":
            line += 1
            line_start = pos
            continue
        if kind in ("WS", "COMMENT"):
            continue
        if kind == "IDENT" and text in KEYWORDS:
            kind = "KEYWORD"
        yield Token(kind, text, line, column)
    yield Token("EOF", "", line, pos - line_start + 1)


class TokenStream:
    """Token cursor with one-token lookahead helpers."""

    def __init__(self, source: str) -> None:
        self.tokens = list(tokenize(source))
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def at(self, text: str) -> bool:
        tok = self.current
        return tok.kind in ("OP", "KEYWORD") and tok.text == text

    def at_kind(self, kind: str) -> bool:
        return self.current.kind == kind

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str | None = None) -> Token:
        if self.current.kind != kind:
            raise self.error(f"expected {what or kind.lower()}")
        return self.advance()

    def error(self, message: str) -> ParseError:
        tok = self.current
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return ParseError(f"{message}, found {found}", tok.line, tok.column)
