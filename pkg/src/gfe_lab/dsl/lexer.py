"""Tokenizer for ``.gfe`` sources."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import DslError

KEYWORDS = frozenset({"unknown", "vars", "domain", "codomain", "eq"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),:;=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, keyword, op, eof
    text: str
    line: int
    col: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and lexeme in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, lexeme, line, pos - line_start + 1, pos))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens
