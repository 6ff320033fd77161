"""Parsing, validation and printing of ``def::ung`` / ``def::total`` programs."""

from __future__ import annotations

from typing import Optional, Union

from . import sexpr
from .errors import RecursiveCallInTest, ValidationError
from .sexpr import Datum, Integer, Quoted, SList, Symbol
from .syntax import (
    LEXICOGRAPHIC_LESS,
    NATURAL_LESS,
    NIL,
    TRUE,
    And,
    BoolLit,
    Call,
    Expr,
    FunctionDef,
    GeneratedDef,
    If,
    IntLit,
    NilLit,
    Or,
    Prim,
    Program,
    Signature,
    SymLit,
    TotalitySpec,
    Var,
    contains_call,
)
from .values import PRIMITIVES

SPECIAL_FORMS = {"if", "and", "or", "quote"}
IGNORED_XARGS = {":guard-hints", ":signature-hints", ":verify-guards"}
RELATIONS = {"l<": LEXICOGRAPHIC_LESS, "o<": NATURAL_LESS, "<": NATURAL_LESS}
_RELATION_NAMES = {LEXICOGRAPHIC_LESS: "l<", NATURAL_LESS: "o<"}


def _fail(msg: str, at: Optional[Datum]) -> ValidationError:
    if at is None:
        return ValidationError(msg)
    return ValidationError(msg, at.line, at.col)


def _symbol(d: Datum, what: str) -> str:
    if not isinstance(d, Symbol):
        raise _fail(f"expected {what}, got {d!r}", d)
    return d.name


def _check_new_name(d: Datum, what: str) -> str:
    name = _symbol(d, what)
    if name in ("t", "nil") or name in PRIMITIVES or name in SPECIAL_FORMS or name.startswith(":"):
        raise _fail(f"{name!r} is reserved and cannot be used as a {what}", d)
    return name


class _Scope:
    def __init__(self, params: tuple[str, ...], arities: dict[str, int], forbid_self: Optional[str] = None):
        self.params = set(params)
        self.arities = arities
        self.forbid_self = forbid_self


def _expr(d: Datum, scope: _Scope) -> Expr:
    if isinstance(d, Integer):
        return IntLit(d.value)
    if isinstance(d, Symbol):
        if d.name == "t":
            return TRUE
        if d.name == "nil":
            return NIL
        if d.name in scope.params:
            return Var(d.name)
        raise _fail(f"unbound variable {d.name}", d)
    if isinstance(d, Quoted):
        return _quoted(d.datum, d)
    if len(d) == 0:
        return NIL
    head = d[0]
    if not isinstance(head, Symbol):
        raise _fail("operator position must hold a symbol", head)
    op = head.name
    rest = d.items[1:]
    if op == "quote":
        if len(rest) != 1:
            raise _fail("quote takes one argument", d)
        return _quoted(rest[0], d)
    if op == "if":
        if len(rest) != 3:
            raise _fail(f"if takes 3 arguments, got {len(rest)}", d)
        return If(*(_expr(a, scope) for a in rest))
    if op == "and":
        return And(tuple(_expr(a, scope) for a in rest))
    if op == "or":
        return Or(tuple(_expr(a, scope) for a in rest))
    if op in PRIMITIVES:
        args = tuple(_expr(a, scope) for a in rest)
        arity = PRIMITIVES[op].arity
        if len(rest) != arity:
            raise _fail(f"primitive {op} takes {arity} argument(s), got {len(rest)}", d)
        return Prim(op, args)
    if op in scope.arities:
        if op == scope.forbid_self:
            raise _fail(f"{op} may not call itself here", d)
        args = tuple(_expr(a, scope) for a in rest)
        arity = scope.arities[op]
        if len(rest) != arity:
            raise _fail(f"{op} takes {arity} argument(s), got {len(rest)}", d)
        return Call(op, args)
    raise _fail(f"unknown function or primitive {op}", head)


def _quoted(d: Datum, at: Datum) -> Expr:
    if isinstance(d, Symbol):
        if d.name == "nil":
            return NIL
        if d.name == "t":
            return TRUE
        return SymLit(d.name)
    if isinstance(d, Integer):
        return IntLit(d.value)
    if isinstance(d, SList) and len(d) == 0:
        return NIL
    raise _fail("only symbols and integers may be quoted", at)


def _params(d: Datum) -> tuple[str, ...]:
    if not isinstance(d, SList):
        raise _fail("expected a parameter list", d)
    names = []
    for p in d:
        name = _check_new_name(p, "parameter")
        if name in names:
            raise _fail(f"duplicate parameter {name}", p)
        names.append(name)
    return tuple(names)


def _xargs(decls: tuple[Datum, ...]) -> list[tuple[Symbol, Datum]]:
    pairs = []
    for decl in decls:
        if not (isinstance(decl, SList) and len(decl) >= 1 and isinstance(decl[0], Symbol)
                and decl[0].name == "declare"):
            raise _fail("expected (declare (xargs ...))", decl)
        for spec in decl.items[1:]:
            if not (isinstance(spec, SList) and len(spec) >= 1 and isinstance(spec[0], Symbol)
                    and spec[0].name == "xargs"):
                raise _fail("only xargs declarations are supported", spec)
            kvs = spec.items[1:]
            if len(kvs) % 2:
                raise _fail("xargs needs keyword/value pairs", spec)
            for k, v in zip(kvs[::2], kvs[1::2]):
                if not (isinstance(k, Symbol) and k.name.startswith(":")):
                    raise _fail("expected an xargs keyword", k)
                pairs.append((k, v))
    return pairs


def _flag(v: Datum) -> bool:
    if isinstance(v, Symbol) and v.name in ("t", "nil"):
        return v.name == "t"
    raise _fail("expected t or nil", v)


def _unary_predicate(d: Datum) -> str:
    name = _symbol(d, "predicate name")
    if name not in PRIMITIVES or PRIMITIVES[name].arity != 1:
        raise _fail(f"{name} is not a unary primitive predicate", d)
    return name


def _signature(v: Datum, params: tuple[str, ...]) -> Signature:
    if not (isinstance(v, SList) and len(v) == 2 and isinstance(v[0], SList)):
        raise _fail("signature must look like ((pred ...) pred)", v)
    preds = tuple(_unary_predicate(p) for p in v[0])
    if len(preds) != len(params):
        raise _fail(f"signature lists {len(preds)} argument predicate(s) for {len(params)} parameter(s)", v)
    return Signature(preds, _unary_predicate(v[1]))


def _parse_defung(form: SList, arities: dict[str, int]) -> FunctionDef:
    if len(form) < 4:
        raise _fail("def::ung needs a name, a parameter list and a body", form)
    name = _check_new_name(form[1], "function name")
    if name in arities:
        raise _fail(f"duplicate definition of {name}", form[1])
    params = _params(form[2])
    own = dict(arities)
    own[name] = len(params)
    body = _expr(form.items[-1], _Scope(params, own))
    opts: dict = {}
    for k, v in _xargs(form.items[3:-1]):
        key = k.name
        if key in IGNORED_XARGS:
            continue
        if key in opts:
            raise _fail(f"duplicate keyword {key}", k)
        if key == ":default-value":
            opts[key] = _expr(v, _Scope(params, own, forbid_self=name))
        elif key in (":indexed-execution", ":non-executable"):
            opts[key] = _flag(v)
        elif key == ":wrapper-macro":
            opts[key] = _check_new_name(v, "wrapper name")
        elif key == ":signature":
            opts[key] = _signature(v, params)
        else:
            raise _fail(f"unsupported xargs keyword {key}", k)
    return FunctionDef(
        name=name,
        params=params,
        body=body,
        default_value=opts.get(":default-value"),
        indexed_execution=opts.get(":indexed-execution", True),
        non_executable=opts.get(":non-executable", False),
        wrapper_name=opts.get(":wrapper-macro"),
        signature=opts.get(":signature"),
    )


def _parse_total(form: SList, defs: dict[str, FunctionDef], arities: dict[str, int]) -> TotalitySpec:
    if len(form) < 4:
        raise _fail("def::total needs a name, a parameter list and a predicate", form)
    name = _symbol(form[1], "function name")
    if name not in defs:
        raise _fail(f"def::total names undefined function {name}", form[1])
    params = _params(form[2])
    if params != defs[name].params:
        raise _fail(f"def::total parameters {params} differ from those of {name}", form[2])
    scope = _Scope(params, arities, forbid_self=name)
    predicate = _expr(form.items[-1], scope)
    measure = None
    lex_syntax = False
    relation = None
    theorem = f"{name}-terminates"
    for k, v in _xargs(form.items[3:-1]):
        key = k.name
        if key == ":measure":
            if isinstance(v, SList) and len(v) >= 1 and isinstance(v[0], Symbol) and v[0].name == "llist":
                if len(v) < 2:
                    raise _fail("llist needs at least one component", v)
                measure = tuple(_expr(c, scope) for c in v.items[1:])
                lex_syntax = True
            else:
                measure = (_expr(v, scope),)
        elif key == ":well-founded-relation":
            rel = _symbol(v, "relation name")
            if rel not in RELATIONS:
                raise _fail(f"unsupported well-founded relation {rel}", v)
            relation = RELATIONS[rel]
        elif key == ":totality-theorem":
            theorem = _symbol(v, "theorem name")
        elif key in IGNORED_XARGS:
            continue
        else:
            raise _fail(f"unsupported xargs keyword {key}", k)
    if measure is None:
        raise _fail("def::total requires :measure", form)
    if relation is None:
        relation = LEXICOGRAPHIC_LESS if lex_syntax else NATURAL_LESS
    if relation == NATURAL_LESS and len(measure) != 1:
        raise _fail("a natural-number measure must have exactly one component", form)
    return TotalitySpec(name, params, measure, relation, predicate, theorem, lex_syntax)


def parse_program(text: str) -> Program:
    """Parse a sequence of ``def::ung`` and ``def::total`` forms."""
    defs: dict[str, FunctionDef] = {}
    arities: dict[str, int] = {}
    specs: list[TotalitySpec] = []
    theorem_names: set[str] = set()
    for form in sexpr.read_all(text):
        if not (isinstance(form, SList) and len(form) > 0 and isinstance(form[0], Symbol)):
            raise _fail("expected a (def::ung ...) or (def::total ...) form", form)
        head = form[0].name
        if head == "def::ung":
            d = _parse_defung(form, arities)
            defs[d.name] = d
            arities[d.name] = len(d.params)
        elif head == "def::total":
            spec = _parse_total(form, defs, arities)
            if spec.theorem_name in theorem_names:
                raise _fail(f"duplicate totality theorem name {spec.theorem_name}", form)
            theorem_names.add(spec.theorem_name)
            specs.append(spec)
        else:
            raise _fail(f"unknown top-level form {head}", form[0])
    return Program(tuple(defs.values()), tuple(specs))


def parse_expr(text: str, params: tuple[str, ...] = (), arities: Optional[dict[str, int]] = None) -> Expr:
    """Parse a single expression whose free variables must be among ``params``."""
    return _expr(sexpr.read_one(text), _Scope(params, arities or {}))


def validate_transformability(d: FunctionDef) -> None:
    """Reject recursive calls in test positions of the decision spine."""

    def spine(e: Expr, path: str) -> None:
        if isinstance(e, If):
            if contains_call(e.test, d.name):
                raise RecursiveCallInTest(d.name, path + ".test")
            spine(e.then, path + ".then")
            spine(e.else_, path + ".else")
        elif isinstance(e, (And, Or)) and e.args:
            for i, a in enumerate(e.args[:-1]):
                if contains_call(a, d.name):
                    raise RecursiveCallInTest(d.name, f"{path}.{type(e).__name__.lower()}[{i}]")
            spine(e.args[-1], f"{path}.{type(e).__name__.lower()}[{len(e.args) - 1}]")

    spine(d.body, "body")


# -- printing ---------------------------------------------------------------

Tree = Union[str, list]


def expr_tree(e: Expr) -> Tree:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "t" if e.value else "nil"
    if isinstance(e, NilLit):
        return "nil"
    if isinstance(e, SymLit):
        return "'" + e.name
    if isinstance(e, Var):
        return e.name
    if isinstance(e, If):
        return ["if", expr_tree(e.test), expr_tree(e.then), expr_tree(e.else_)]
    if isinstance(e, And):
        return ["and", *map(expr_tree, e.args)]
    if isinstance(e, Or):
        return ["or", *map(expr_tree, e.args)]
    if isinstance(e, Prim):
        return [e.op, *map(expr_tree, e.args)]
    if isinstance(e, Call):
        return [e.fn, *map(expr_tree, e.args)]
    raise TypeError(f"not an expression: {e!r}")


def _flat(t: Tree) -> str:
    if isinstance(t, str):
        return t
    return "(" + " ".join(_flat(x) for x in t) + ")"


def pretty(t: Tree, indent: int = 0, width: int = 78) -> str:
    flat = _flat(t)
    if isinstance(t, str) or indent + len(flat) <= width or len(t) < 2:
        return flat
    head = _flat(t[0])
    pad = " " * (indent + 2)
    if head == "xargs":
        # keyword/value pairs stay together, one pair per line
        col = indent + len("(xargs ")
        pairs = [t[i:i + 2] for i in range(1, len(t), 2)]
        lines = [" ".join(_flat(x) if j == 0 else pretty(x, col + len(_flat(p[0])) + 1, width)
                          for j, x in enumerate(p)) for p in pairs]
        return "(xargs " + ("\n" + " " * col).join(lines) + ")"
    if head in ("defun", "def::ung", "def::total") and len(t) >= 3:
        first = f"({head} {_flat(t[1])} {_flat(t[2])}"
        rest = t[3:]
    else:
        first = "(" + head + " " + pretty(t[1], indent + len(head) + 2, width)
        rest = t[2:]
    lines = [first] + [pad + pretty(x, indent + 2, width) for x in rest]
    return "\n".join(lines) + ")"


def print_expr(e: Expr) -> str:
    return _flat(expr_tree(e))


def _xargs_tree(d: FunctionDef) -> list:
    kv: list = []
    if d.signature is not None:
        kv += [":signature", [list(d.signature.params), d.signature.result]]
    if d.default_value is not None:
        kv += [":default-value", expr_tree(d.default_value)]
    if not d.indexed_execution:
        kv += [":indexed-execution", "nil"]
    if d.non_executable:
        kv += [":non-executable", "t"]
    if d.wrapper_name is not None:
        kv += [":wrapper-macro", d.wrapper_name]
    return kv


def definition_tree(d: Union[FunctionDef, GeneratedDef, TotalitySpec]) -> Tree:
    if isinstance(d, GeneratedDef):
        return ["defun", d.name, list(d.params), expr_tree(d.body)]
    if isinstance(d, FunctionDef):
        kv = _xargs_tree(d)
        decl = [["declare", ["xargs", *kv]]] if kv else []
        return ["def::ung", d.name, list(d.params), *decl, expr_tree(d.body)]
    if isinstance(d, TotalitySpec):
        if d.lexicographic_syntax:
            measure: Tree = ["llist", *map(expr_tree, d.measure)]
        else:
            measure = expr_tree(d.measure[0])
        kv = [":measure", measure, ":well-founded-relation", _RELATION_NAMES[d.relation],
              ":totality-theorem", d.theorem_name]
        return ["def::total", d.fname, list(d.params), ["declare", ["xargs", *kv]], expr_tree(d.predicate)]
    raise TypeError(f"cannot print {d!r}")


def print_definition(d: Union[FunctionDef, GeneratedDef, TotalitySpec], width: int = 78) -> str:
    t = definition_tree(d)
    return pretty(t, 0, width)


def print_program(p: Program) -> str:
    parts = [print_definition(d) for d in p.definitions]
    parts += [print_definition(s) for s in p.totality_specs]
    return "\n\n".join(parts) + "\n"
