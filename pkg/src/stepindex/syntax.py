"""Abstract syntax of the first-order language and its definitions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class SymLit:
    name: str


@dataclass(frozen=True)
class NilLit:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Prim:
    op: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class If:
    test: "Expr"
    then: "Expr"
    else_: "Expr"


@dataclass(frozen=True)
class And:
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expr", ...]


Expr = Union[IntLit, BoolLit, SymLit, NilLit, Var, Prim, If, And, Or, Call]

TRUE = BoolLit(True)
NIL = NilLit()


@dataclass(frozen=True)
class Signature:
    params: tuple[str, ...]
    result: str


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[str, ...]
    body: Expr
    default_value: Optional[Expr] = None
    indexed_execution: bool = True
    non_executable: bool = False
    wrapper_name: Optional[str] = None
    signature: Optional[Signature] = None


@dataclass(frozen=True)
class GeneratedDef:
    """A definition synthesized by the transform (printed as ``defun``)."""

    name: str
    params: tuple[str, ...]
    body: Expr


NATURAL_LESS = "natural-less"
LEXICOGRAPHIC_LESS = "lexicographic-less"


@dataclass(frozen=True)
class TotalitySpec:
    fname: str
    params: tuple[str, ...]
    measure: tuple[Expr, ...]
    relation: str
    predicate: Expr
    theorem_name: str
    lexicographic_syntax: bool = False


@dataclass(frozen=True)
class Program:
    definitions: tuple[FunctionDef, ...]
    totality_specs: tuple[TotalitySpec, ...] = ()

    def get(self, name: str) -> FunctionDef:
        for d in self.definitions:
            if d.name == name:
                return d
        raise KeyError(name)

    def names(self) -> list[str]:
        return [d.name for d in self.definitions]


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Prim, And, Or, Call)):
        return e.args
    if isinstance(e, If):
        return (e.test, e.then, e.else_)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from walk(c)


def calls_to(e: Expr, fname: str) -> list[Call]:
    """All calls to ``fname`` in ``e`` (pre-order)."""
    return [n for n in walk(e) if isinstance(n, Call) and n.fn == fname]


def contains_call(e: Expr, fname: str) -> bool:
    return any(isinstance(n, Call) and n.fn == fname for n in walk(e))


def free_vars(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def map_calls(e: Expr, fn: Callable[[Call, tuple[Expr, ...]], Expr]) -> Expr:
    """Bottom-up rewrite of every call; ``fn`` receives the call and its rewritten args."""
    if isinstance(e, Call):
        args = tuple(map_calls(a, fn) for a in e.args)
        return fn(e, args)
    if isinstance(e, Prim):
        return Prim(e.op, tuple(map_calls(a, fn) for a in e.args))
    if isinstance(e, And):
        return And(tuple(map_calls(a, fn) for a in e.args))
    if isinstance(e, Or):
        return Or(tuple(map_calls(a, fn) for a in e.args))
    if isinstance(e, If):
        return If(map_calls(e.test, fn), map_calls(e.then, fn), map_calls(e.else_, fn))
    return e


def substitute(e: Expr, env: dict[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return env.get(e.name, e)
    if isinstance(e, Call):
        return Call(e.fn, tuple(substitute(a, env) for a in e.args))
    if isinstance(e, Prim):
        return Prim(e.op, tuple(substitute(a, env) for a in e.args))
    if isinstance(e, And):
        return And(tuple(substitute(a, env) for a in e.args))
    if isinstance(e, Or):
        return Or(tuple(substitute(a, env) for a in e.args))
    if isinstance(e, If):
        return If(substitute(e.test, env), substitute(e.then, env), substitute(e.else_, env))
    return e
