"""Runtime values and the fixed primitive table.

Values are plain Python objects:

* ``int``      -- exact integers (never ``bool``)
* ``T``        -- the canonical true value (Python ``True``)
* ``NIL``      -- the single false value (Python ``None``)
* :class:`Sym` -- a quoted symbol
* :class:`Pair` -- a cons cell
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, NamedTuple

from .errors import DynamicTypeError

T = True
NIL = None

Value = Any


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Pair:
    car: Value
    cdr: Value


def is_int(v: Value) -> bool:
    return type(v) is int


def truthy(v: Value) -> bool:
    return v is not None and v is not False


def from_bool(b: bool) -> Value:
    return T if b else NIL


def equal(a: Value, b: Value) -> bool:
    """Structural equality that never confuses ``t`` with ``1``."""
    if a is False:
        a = None
    if b is False:
        b = None
    if type(a) is not type(b):
        return False
    if type(a) is Pair:
        return equal(a.car, b.car) and equal(a.cdr, b.cdr)
    return a == b


def render(v: Value) -> str:
    if v is None or v is False:
        return "nil"
    if v is True:
        return "t"
    if type(v) is int:
        return str(v)
    if type(v) is Sym:
        return v.name
    if type(v) is Pair:
        parts = []
        while type(v) is Pair:
            parts.append(render(v.car))
            v = v.cdr
        tail = "" if v is None else " . " + render(v)
        return "(" + " ".join(parts) + tail + ")"
    raise TypeError(f"not a value: {v!r}")


def _need_int(op: str, *vs: Value) -> None:
    for v in vs:
        if type(v) is not int:
            raise DynamicTypeError(f"{op}: expected an integer, got {render(v)}")


def _add(a, b):
    _need_int("+", a, b)
    return a + b


def _sub(a, b):
    _need_int("-", a, b)
    return a - b


def _mul(a, b):
    _need_int("*", a, b)
    return a * b


def _inc(a):
    _need_int("1+", a)
    return a + 1


def _dec(a):
    _need_int("1-", a)
    return a - 1


def _num_eq(a, b):
    _need_int("=", a, b)
    return from_bool(a == b)


def _lt(a, b):
    _need_int("<", a, b)
    return from_bool(a < b)


def _le(a, b):
    _need_int("<=", a, b)
    return from_bool(a <= b)


def _zp(a):
    return from_bool(not (type(a) is int and a > 0))


def _nfix(a):
    return a if type(a) is int and a >= 0 else 0


def _max(a, b):
    _need_int("max", a, b)
    return a if a >= b else b


def _not(a):
    return from_bool(not truthy(a))


def _consp(a):
    return from_bool(type(a) is Pair)


def _car(a):
    if a is None:
        return None
    if type(a) is not Pair:
        raise DynamicTypeError(f"car: expected a pair, got {render(a)}")
    return a.car


def _cdr(a):
    if a is None:
        return None
    if type(a) is not Pair:
        raise DynamicTypeError(f"cdr: expected a pair, got {render(a)}")
    return a.cdr


def _cons(a, b):
    return Pair(a, b)


def _equal(a, b):
    return from_bool(equal(a, b))


def _natp(a):
    return from_bool(type(a) is int and a >= 0)


def _integerp(a):
    return from_bool(type(a) is int)


class Primitive(NamedTuple):
    name: str
    arity: int
    fn: Callable[..., Value]


PRIMITIVES: dict[str, Primitive] = {
    p.name: p
    for p in [
        Primitive("+", 2, _add),
        Primitive("-", 2, _sub),
        Primitive("*", 2, _mul),
        Primitive("1+", 1, _inc),
        Primitive("1-", 1, _dec),
        Primitive("=", 2, _num_eq),
        Primitive("<", 2, _lt),
        Primitive("<=", 2, _le),
        Primitive("zp", 1, _zp),
        Primitive("nfix", 1, _nfix),
        Primitive("max", 2, _max),
        Primitive("not", 1, _not),
        Primitive("consp", 1, _consp),
        Primitive("car", 1, _car),
        Primitive("cdr", 1, _cdr),
        Primitive("cons", 2, _cons),
        Primitive("equal", 2, _equal),
        Primitive("natp", 1, _natp),
        Primitive("integerp", 1, _integerp),
    ]
}


def apply_primitive(op: str, args: list[Value]) -> Value:
    return PRIMITIVES[op].fn(*args)
