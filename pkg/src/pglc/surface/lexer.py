"""Tokenizer shared by programs, formulas and proof scripts."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional


class PglcSyntaxError(Exception):
    """Parse failure with position and the set of tokens that would have been accepted."""

    def __init__(self, msg: str, line: int, col: int, expected: Iterable[str] = (), file: str = "<input>"):
        self.msg = msg
        self.line = line
        self.col = col
        self.expected: FrozenSet[str] = frozenset(expected)
        self.file = file
        exp = ""
        if self.expected:
            exp = "; expected one of: " + ", ".join(sorted(self.expected))
        super().__init__(f"{file}:{line}:{col}: {msg}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT UIDENT NAT RAT STRING SYM EOF
    text: str
    line: int
    col: int

    def __str__(self) -> str:
        return "end of input" if self.kind == "EOF" else repr(self.text)


# longest symbols first
SYMBOLS = [
    "<*>", "<+>", "<.>",
    "<~", "<-", "->", "=>", "<=", "\\/", "/\\", "|>", "[]", "::", "|-", ":=", "..",
    "\\", ".", "(", ")", "[", "]", "{", "}", ",", ":", ";", "=", "~", "|", "+", "-", "*", "/", "@",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>--[^\n]*)"
    r"|(?P<rat>\d+/\d+)"
    r"|(?P<nat>\d+)"
    r"|(?P<string>\"[^\"\n]*\")"
    r"|(?P<uident>[A-Z][A-Za-z0-9_']*)"
    r"|(?P<ident>[a-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in SYMBOLS) + r")"
)


def tokenize(src: str, file: str = "<input>") -> List[Token]:
    out: List[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise PglcSyntaxError(f"unexpected character {src[pos]!r}", line, col, file=file)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(text)
        else:
            tk = {"rat": "RAT", "nat": "NAT", "string": "STRING", "uident": "UIDENT",
                  "ident": "IDENT", "sym": "SYM"}[kind]
            if tk == "STRING":
                text = text[1:-1]
            out.append(Token(tk, text, line, col))
            col += len(m.group())
        pos = m.end()
    out.append(Token("EOF", "", line, col))
    return out


def describe(tok: Optional[Token]) -> str:
    return "end of input" if tok is None or tok.kind == "EOF" else repr(tok.text)
