"""Synthesis of step-indexed definitions from a partial recursive definition.

For a source function ``f`` the transform produces

* ``if``       -- the indexed function: ``(if (zp d) DEFAULT body)`` with every
                  recursive call made at index ``(1- d)``
* ``if-dom``   -- the indexed domain predicate, with nested calls lifted out
* ``mf``       -- the unindexed fast path (source equations, no checks)
* ``f-domain`` -- the executable domain predicate (nested values via ``mf``)
* ``comp-f``   -- the indexed executable that defers the domain check to
                  index exhaustion

plus four equations over the logical-level functions that serve as check
targets.  Calls to other (earlier) functions of the program are routed to
their fast paths everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

from .errors import NoBaseCase, TransformError
from .surface import SPECIAL_FORMS, validate_transformability
from .syntax import (
    TRUE,
    And,
    Call,
    Expr,
    FunctionDef,
    GeneratedDef,
    If,
    IntLit,
    Or,
    Prim,
    Program,
    Var,
    contains_call,
    map_calls,
)
from .values import PRIMITIVES

PathCondition = tuple[tuple[Expr, bool], ...]

ZERO = IntLit(0)


@dataclass(frozen=True)
class Leaf:
    path: PathCondition
    expr: Expr
    is_base: bool


@dataclass(frozen=True)
class BranchAnalysis:
    leaves: tuple[Leaf, ...]

    @property
    def base_leaves(self) -> tuple[Leaf, ...]:
        return tuple(leaf for leaf in self.leaves if leaf.is_base)


@dataclass(frozen=True)
class Names:
    """Names of every function the construction introduces for ``fn``."""

    fn: str
    indexed: str
    indexed_dom: str
    fast: str
    domain: str
    comp: str
    in_domain: str
    logic: str
    logic_dom: str
    measure: str
    big: str = "big"

    @classmethod
    def for_function(cls, fn: str) -> "Names":
        def prefixed(p: str) -> str:
            # f would give "if"; fall back to a hyphen for reserved words
            return f"{p}-{fn}" if p + fn in _RESERVED else p + fn

        return cls(
            fn=fn,
            indexed=prefixed("i"),
            indexed_dom=f"{prefixed('i')}-dom",
            fast=prefixed("m"),
            domain=f"{fn}-domain",
            comp=f"comp-{fn}",
            in_domain=f"{fn}-in-domain",
            logic=prefixed("l"),
            logic_dom=f"{prefixed('l')}-dom",
            measure=f"{fn}-measure",
        )

    def generated(self) -> list[str]:
        return [self.indexed, self.indexed_dom, self.fast, self.domain, self.comp,
                self.in_domain, self.logic, self.logic_dom, self.measure]


_RESERVED = SPECIAL_FORMS | {"t", "nil", "big"}


@dataclass(frozen=True)
class Equation:
    name: str
    lhs: Call
    rhs: Expr
    domain_conditioned: bool = False


@dataclass(frozen=True)
class DerivedEquations:
    l_fn_equation: Equation
    l_dom_equation: Equation
    measure_equation: Equation
    exported_equation: Equation

    def __iter__(self) -> Iterator[Equation]:
        yield self.l_dom_equation
        yield self.l_fn_equation
        yield self.measure_equation
        yield self.exported_equation


@dataclass(frozen=True)
class TransformResult:
    source: FunctionDef
    names: Names
    index_var: str
    analysis: BranchAnalysis
    default_expr: Expr
    base_predicate: Expr
    indexed_fn: GeneratedDef
    indexed_dom: GeneratedDef
    fast_fn: GeneratedDef
    exec_dom: GeneratedDef
    comp_fn: GeneratedDef
    derived: DerivedEquations

    @property
    def name(self) -> str:
        return self.source.name

    @property
    def params(self) -> tuple[str, ...]:
        return self.source.params

    def generated(self) -> list[GeneratedDef]:
        return [self.indexed_fn, self.indexed_dom, self.fast_fn, self.exec_dom, self.comp_fn]


# -- branch structure ----------------------------------------------------------

def analyze_branches(d: FunctionDef) -> BranchAnalysis:
    leaves: list[Leaf] = []

    def go(e: Expr, path: PathCondition) -> None:
        if isinstance(e, If):
            go(e.then, path + ((e.test, True),))
            go(e.else_, path + ((e.test, False),))
        else:
            leaves.append(Leaf(path, e, not contains_call(e, d.name)))

    go(d.body, ())
    if not any(leaf.is_base for leaf in leaves):
        raise NoBaseCase(d.name)
    return BranchAnalysis(tuple(leaves))


def infer_default(d: FunctionDef, analysis: BranchAnalysis | None = None) -> Expr:
    if d.default_value is not None:
        return d.default_value
    analysis = analysis or analyze_branches(d)
    return analysis.base_leaves[0].expr


def _literal(test: Expr, polarity: bool) -> Expr:
    return test if polarity else Prim("not", (test,))


def build_base_predicate(analysis: BranchAnalysis) -> Expr:
    disjuncts = []
    for leaf in analysis.base_leaves:
        lits = [_literal(t, pol) for t, pol in leaf.path]
        if not lits:
            disjuncts.append(TRUE)
        elif len(lits) == 1:
            disjuncts.append(lits[0])
        else:
            disjuncts.append(And(tuple(lits)))
    if len(disjuncts) == 1:
        return disjuncts[0]
    return Or(tuple(disjuncts))


# -- call rewriting and obligation lifting ----------------------------------------

def _route_helpers(body: Expr, fname: str) -> Expr:
    """Send calls to other program functions to their fast paths."""
    return map_calls(body, lambda c, args: Call(c.fn if c.fn == fname else Names.for_function(c.fn).fast, args))


def _rewrite_self(e: Expr, fname: str, make: Callable[[tuple[Expr, ...]], Expr]) -> Expr:
    return map_calls(e, lambda c, args: make(args) if c.fn == fname else Call(c.fn, args))


def _conj(parts: list[Expr]) -> Expr:
    flat: list[Expr] = []
    for p in parts:
        if p == TRUE:
            continue
        if isinstance(p, And):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


class _Lifter:
    """Builds the obligations / measure terms contributed by one leaf.

    ``lift`` turns a subexpression into its value form (recursive calls replaced
    by the value-producing function); ``site`` builds the term contributed by one
    recursive call from its lifted arguments.
    """

    def __init__(self, fname: str, lift: Callable[[Expr], Expr], site: Callable[[tuple[Expr, ...]], Expr]):
        self.fname = fname
        self.lift = lift
        self.site = site

    def obligations(self, e: Expr) -> Expr:
        if isinstance(e, Call):
            parts = [self.obligations(a) for a in e.args]
            if e.fn == self.fname:
                parts.append(self.site(tuple(self.lift(a) for a in e.args)))
            return _conj(parts)
        if isinstance(e, Prim):
            return _conj([self.obligations(a) for a in e.args])
        if isinstance(e, If):
            ot, oe = self.obligations(e.then), self.obligations(e.else_)
            guard = TRUE if ot == TRUE and oe == TRUE else If(self.lift(e.test), ot, oe)
            return _conj([self.obligations(e.test), guard])
        if isinstance(e, (And, Or)):
            return self._chain(e.args, isinstance(e, And), self.obligations, TRUE, _conj)
        return TRUE

    def depth(self, e: Expr) -> Expr:
        if isinstance(e, Call):
            parts = [self.depth(a) for a in e.args]
            if e.fn == self.fname:
                parts.append(self.site(tuple(self.lift(a) for a in e.args)))
            return _max(parts)
        if isinstance(e, Prim):
            return _max([self.depth(a) for a in e.args])
        if isinstance(e, If):
            dt, de = self.depth(e.then), self.depth(e.else_)
            guard = ZERO if dt == ZERO and de == ZERO else If(self.lift(e.test), dt, de)
            return _max([self.depth(e.test), guard])
        if isinstance(e, (And, Or)):
            return self._chain(e.args, isinstance(e, And), self.depth, ZERO, _max)
        return ZERO

    def _chain(self, args, is_and, term, unit, combine) -> Expr:
        # later operands are only evaluated when the earlier ones let control through
        if not args:
            return unit
        first = term(args[0])
        rest = self._chain(args[1:], is_and, term, unit, combine)
        if rest == unit:
            return first
        test = self.lift(args[0])
        guarded = If(test, rest, unit) if is_and else If(test, unit, rest)
        return combine([first, guarded])


def _max(parts: list[Expr]) -> Expr:
    parts = [p for p in parts if p != ZERO]
    if not parts:
        return ZERO
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Prim("max", (p, out))
    return out


def _spine(e: Expr, leaf: Callable[[Expr], Expr]) -> Expr:
    if isinstance(e, If):
        return If(e.test, _spine(e.then, leaf), _spine(e.else_, leaf))
    return leaf(e)


# -- the construction -----------------------------------------------------------------

def _index_var(params: tuple[str, ...]) -> str:
    if "d" not in params:
        return "d"
    i = 1
    while f"d{i}" in params:
        i += 1
    return f"d{i}"


def _exhausted_value(d: FunctionDef, default_expr: Expr) -> Expr:
    # An inferred default is a base leaf already. A user default is not, so at
    # index zero the base leaves keep their own values and only the recursive
    # leaves fall back to it; otherwise iF(0) would disagree with iF(1) on base
    # points, where iDom(0) holds.
    if d.default_value is None:
        return default_expr
    body = _route_helpers(d.body, d.name)
    return _collapse(_spine(body, lambda e: default_expr if contains_call(e, d.name) else e))


def _collapse(e: Expr) -> Expr:
    if not isinstance(e, If):
        return e
    then, else_ = _collapse(e.then), _collapse(e.else_)
    return then if then == else_ else If(e.test, then, else_)


def build_indexed_fn(d: FunctionDef, default_expr: Expr, names: Names, ivar: str) -> GeneratedDef:
    dec = Prim("1-", (Var(ivar),))
    body = _rewrite_self(_route_helpers(d.body, d.name), d.name, lambda a: Call(names.indexed, (dec,) + a))
    return GeneratedDef(names.indexed, (ivar,) + d.params,
                        If(Prim("zp", (Var(ivar),)), _exhausted_value(d, default_expr), body))


def build_indexed_dom(d: FunctionDef, base_predicate: Expr, names: Names, ivar: str) -> GeneratedDef:
    dec = Prim("1-", (Var(ivar),))
    lifter = _Lifter(
        d.name,
        lift=lambda e: _rewrite_self(e, d.name, lambda a: Call(names.indexed, (dec,) + a)),
        site=lambda a: Call(names.indexed_dom, (dec,) + a),
    )
    body = _spine(_route_helpers(d.body, d.name), lifter.obligations)
    return GeneratedDef(names.indexed_dom, (ivar,) + d.params,
                        If(Prim("zp", (Var(ivar),)), base_predicate, body))


def build_fast_fn(d: FunctionDef, names: Names) -> GeneratedDef:
    body = _rewrite_self(_route_helpers(d.body, d.name), d.name, lambda a: Call(names.fast, a))
    return GeneratedDef(names.fast, d.params, body)


def build_exec_dom(d: FunctionDef, names: Names) -> GeneratedDef:
    lifter = _Lifter(
        d.name,
        lift=lambda e: _rewrite_self(e, d.name, lambda a: Call(names.fast, a)),
        site=lambda a: Call(names.domain, a),
    )
    return GeneratedDef(names.domain, d.params, _spine(_route_helpers(d.body, d.name), lifter.obligations))


def build_comp_fn(d: FunctionDef, default_expr: Expr, names: Names, ivar: str) -> GeneratedDef:
    dec = Prim("1-", (Var(ivar),))
    args = tuple(Var(p) for p in d.params)
    exhausted = If(Call(names.in_domain, args), Call(names.fast, args), default_expr)
    body = _rewrite_self(_route_helpers(d.body, d.name), d.name, lambda a: Call(names.comp, (dec,) + a))
    return GeneratedDef(names.comp, (ivar,) + d.params, If(Prim("zp", (Var(ivar),)), exhausted, body))


def derive_equations(d: FunctionDef, default_expr: Expr, names: Names) -> DerivedEquations:
    args = tuple(Var(p) for p in d.params)
    body = _route_helpers(d.body, d.name)
    off_domain = Prim("not", (Call(names.logic_dom, args),))

    def to_logic(e: Expr) -> Expr:
        return _rewrite_self(e, d.name, lambda a: Call(names.logic, a))

    dom_lifter = _Lifter(d.name, to_logic, lambda a: Call(names.logic_dom, a))
    l_dom = Equation("l-dom-equation", Call(names.logic_dom, args),
                     _spine(body, dom_lifter.obligations), domain_conditioned=True)

    l_fn = Equation("l-fn-equation", Call(names.logic, args), If(off_domain, default_expr, to_logic(body)))

    measure_lifter = _Lifter(d.name, to_logic, lambda a: Call(names.measure, a))

    def leaf_measure(e: Expr) -> Expr:
        if not contains_call(e, d.name):
            return ZERO
        inner = measure_lifter.depth(e)
        return IntLit(1) if inner == ZERO else Prim("1+", (inner,))

    def measure_spine(e: Expr) -> Expr:
        if isinstance(e, If):
            t, f = measure_spine(e.then), measure_spine(e.else_)
            return ZERO if t == ZERO and f == ZERO else If(e.test, t, f)
        return leaf_measure(e)

    mbody = measure_spine(body)
    measure = Equation("measure-equation", Call(names.measure, args),
                       ZERO if mbody == ZERO else If(off_domain, ZERO, mbody))

    exported_body = _rewrite_self(body, d.name, lambda a: Call(names.fn, a))
    exported = Equation("exported-equation", Call(names.fn, args),
                        If(off_domain, Call(names.comp, (Call(names.big, ()),) + args), exported_body))
    return DerivedEquations(l_fn, l_dom, measure, exported)


def transform(d: FunctionDef) -> TransformResult:
    validate_transformability(d)
    analysis = analyze_branches(d)
    default_expr = _route_helpers(infer_default(d, analysis), d.name)
    base_predicate = _route_helpers(build_base_predicate(analysis), d.name)
    names = Names.for_function(d.name)
    ivar = _index_var(d.params)
    return TransformResult(
        source=d,
        names=names,
        index_var=ivar,
        analysis=analysis,
        default_expr=default_expr,
        base_predicate=base_predicate,
        indexed_fn=build_indexed_fn(d, default_expr, names, ivar),
        indexed_dom=build_indexed_dom(d, base_predicate, names, ivar),
        fast_fn=build_fast_fn(d, names),
        exec_dom=build_exec_dom(d, names),
        comp_fn=build_comp_fn(d, default_expr, names, ivar),
        derived=derive_equations(d, default_expr, names),
    )


def transform_program(program: Program) -> dict[str, TransformResult]:
    taken = set(program.names()) | set(PRIMITIVES) | _RESERVED
    out: dict[str, TransformResult] = {}
    introduced: dict[str, str] = {}
    for d in program.definitions:
        tr = transform(d)
        for g in tr.names.generated():
            if g in taken or g in introduced:
                owner = introduced.get(g, g)
                raise TransformError(f"generated name {g} for {d.name} clashes with {owner}")
            introduced[g] = d.name
        out[d.name] = tr
    return out
