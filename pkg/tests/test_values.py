import pytest
from hypothesis import given, strategies as st

from stepindex.errors import DynamicTypeError, RecursionSafetyCap
from stepindex.interp import eval_expr
from stepindex.stats import EvalStats
from stepindex.surface import parse_expr, parse_program
from stepindex.values import NIL, T, Pair, Sym, equal, render, truthy


def ev(text, **env):
    return eval_expr(env, parse_expr(text, tuple(env)))


@pytest.mark.parametrize("text, expected", [
    ("(zp -3)", T), ("(zp 0)", T), ("(zp 1)", NIL), ("(zp 'a)", T),
    ("(nfix -4)", 0), ("(nfix 9)", 9), ("(nfix nil)", 0),
    ("(max 2 7)", 7), ("(- 3 10)", -7), ("(* -4 5)", -20),
    ("(car nil)", NIL), ("(cdr nil)", NIL),
    ("(and 1 2)", 2), ("(and)", T), ("(or nil 3)", 3), ("(or)", NIL),
    ("(equal t 1)", NIL), ("(equal 'a 'a)", T),
    ("(natp 0)", T), ("(natp -1)", NIL), ("(integerp 'a)", NIL),
])
def test_primitives(text, expected):
    assert equal(ev(text), expected)


def test_env_lookup():
    assert ev("(1+ y)", x=0, y=5) == 6


def test_bignums_are_exact():
    assert ev("(* x x)", x=2**100) == 2**200


def test_type_errors_carry_a_path():
    with pytest.raises(DynamicTypeError) as e:
        ev("(+ t 1)")
    assert e.value.path
    with pytest.raises(DynamicTypeError):
        ev("(car 3)")


def test_short_circuit():
    # the second conjunct would be a type error
    assert ev("(and nil (car 3))") is NIL
    assert ev("(or 1 (car 3))") == 1


def test_render():
    assert render(Pair(1, Pair(Sym("a"), NIL))) == "(1 a)"
    assert render(Pair(1, 2)) == "(1 . 2)"
    assert render(T) == "t" and render(NIL) == "nil" and render(False) == "nil"


def test_truthiness_and_equality():
    assert not truthy(NIL) and not truthy(False) and truthy(0)
    assert not equal(T, 1)
    assert equal(False, NIL)


def test_stats_and_safety_cap():
    p = parse_program("(def::ung f (x) (if (= x 0) 0 (f (1- x))))")
    call = parse_expr("(f n)", ("n",), {"f": 1})
    st_ = EvalStats()
    assert eval_expr({"n": 10}, call, p, st_) == 0
    assert st_.call_count == 11 and st_.max_recursion_depth == 11
    with pytest.raises(RecursionSafetyCap):
        eval_expr({"n": -1}, call, p, safety_cap=50)


@given(st.integers(), st.integers())
def test_arithmetic_matches_python(a, b):
    assert ev("(+ a b)", a=a, b=b) == a + b
    assert ev("(- a b)", a=a, b=b) == a - b
    assert ev("(max a b)", a=a, b=b) == max(a, b)
    assert truthy(ev("(< a b)", a=a, b=b)) == (a < b)
