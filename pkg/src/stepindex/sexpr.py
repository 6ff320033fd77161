"""Reader for the s-expression surface syntax.

The reader keeps source positions on every node so later stages can report
located errors.  Symbols are case-folded to lower case.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import ParseError

_INT_RE = re.compile(r"[+-]?\d+\Z")
_DELIMS = set("()';")


@dataclass(frozen=True, eq=False)
class Symbol:
    name: str
    line: int = 0
    col: int = 0

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, eq=False)
class Integer:
    value: int
    line: int = 0
    col: int = 0

    def __repr__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, eq=False)
class SList:
    items: tuple["Datum", ...]
    line: int = 0
    col: int = 0

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self) -> Iterator["Datum"]:
        return iter(self.items)

    def __repr__(self) -> str:
        return "(" + " ".join(map(repr, self.items)) + ")"


@dataclass(frozen=True, eq=False)
class Quoted:
    datum: "Datum"
    line: int = 0
    col: int = 0

    def __repr__(self) -> str:
        return "'" + repr(self.datum)


Datum = Union[Symbol, Integer, SList, Quoted]


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1

    def _advance(self) -> str:
        ch = self.text[self.i]
        self.i += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def _skip(self) -> None:
        text = self.text
        while self.i < len(text):
            ch = text[self.i]
            if ch == ";":
                while self.i < len(text) and text[self.i] != "\n":
                    self._advance()
            elif ch.isspace():
                self._advance()
            else:
                return

    def at_end(self) -> bool:
        self._skip()
        return self.i >= len(self.text)

    def read(self) -> Datum:
        self._skip()
        if self.i >= len(self.text):
            raise ParseError("unexpected end of input", self.line, self.col)
        line, col = self.line, self.col
        ch = self.text[self.i]
        if ch == "(":
            self._advance()
            items = []
            while True:
                self._skip()
                if self.i >= len(self.text):
                    raise ParseError("unclosed '('", line, col)
                if self.text[self.i] == ")":
                    self._advance()
                    return SList(tuple(items), line, col)
                items.append(self.read())
        if ch == ")":
            raise ParseError("unbalanced ')'", line, col)
        if ch == "'":
            self._advance()
            return Quoted(self.read(), line, col)
        start = self.i
        while self.i < len(self.text):
            c = self.text[self.i]
            if c.isspace() or c in _DELIMS:
                break
            self._advance()
        token = self.text[start:self.i]
        if _INT_RE.match(token):
            return Integer(int(token), line, col)
        if "|" in token or '"' in token or "#" in token:
            raise ParseError(f"unsupported token {token!r}", line, col)
        return Symbol(token.lower(), line, col)


def read_all(text: str) -> list[Datum]:
    """Read every top-level datum in ``text``."""
    reader = _Reader(text)
    out = []
    while not reader.at_end():
        out.append(reader.read())
    return out


def read_one(text: str) -> Datum:
    data = read_all(text)
    if len(data) != 1:
        raise ParseError(f"expected exactly one datum, found {len(data)}")
    return data[0]


def strip(datum: Datum):
    """Position-free nested-tuple view of a datum, handy for structural comparison."""
    if isinstance(datum, Symbol):
        return datum.name
    if isinstance(datum, Integer):
        return datum.value
    if isinstance(datum, Quoted):
        return ("quote", strip(datum.datum))
    return tuple(strip(d) for d in datum.items)
