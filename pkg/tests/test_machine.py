import pytest
from hypothesis import given, strategies as st

from stepindex.errors import DynamicTypeError, EvaluationError, RecursionSafetyCap
from stepindex.interp import TreeEvaluator
from stepindex.machine import Machine
from stepindex.stats import EvalStats
from stepindex.surface import parse_program
from stepindex.transform import transform_program
from stepindex.values import equal, render

from conftest import corpus_text
from oracle import ack, ack_calls, iack, iack_dom


def engines(text):
    results = transform_program(parse_program(text))
    defs = [g for r in results.values() for g in r.generated()]
    return results, [Machine(defs, "numba"), Machine(defs, "python"), TreeEvaluator(defs)]


def run(engine, name, args, cap=10_000):
    st_ = EvalStats()
    try:
        if isinstance(engine, Machine):
            v = engine.call(name, list(args), safety_cap=cap, stats=st_)
        else:
            engine.safety_cap = cap
            v = engine.call(name, list(args), st_)
        return ("ok", render(v)), st_
    except EvaluationError as exc:
        return ("error", type(exc).__name__), st_


@pytest.fixture(scope="module")
def ack_engines():
    return engines(corpus_text("ack"))


@pytest.mark.parametrize("x, y", [(0, 0), (1, 5), (2, 3), (3, 3)])
def test_fast_path_matches_oracle(ack_engines, x, y):
    results, es = ack_engines
    for e in es:
        (tag, v), st_ = run(e, "mack", [x, y])
        assert v == str(ack(x, y))
        assert st_.call_count == ack_calls(x, y)


@pytest.mark.parametrize("d, x, y", [(0, 1, 0), (1, 1, 0), (4, 1, 1), (7, 2, 2), (12, 3, 1)])
def test_indexed_definitions_match_oracle(ack_engines, d, x, y):
    _, es = ack_engines
    for e in es:
        assert run(e, "iack", [d, x, y])[0][1] == str(iack(d, x, y, default=0))
        assert run(e, "iack-dom", [d, x, y])[0][1] == ("t" if iack_dom(d, x, y, default=0) else "nil")


def test_safety_cap_off_domain(ack_engines):
    _, es = ack_engines
    for e in es:
        (tag, kind), st_ = run(e, "mack", [-1, 0], cap=500)
        assert (tag, kind) == ("error", "RecursionSafetyCap")
        assert st_.max_recursion_depth >= 500


def test_bignum_escape_to_python(ack_engines):
    # values beyond the machine-word range leave the compiled kernel
    _, es = ack_engines
    big = 2**70
    for e in es:
        assert run(e, "mack", [1, big], cap=10)[0] == ("error", "RecursionSafetyCap")
        assert run(e, "mack", [0, big])[0] == ("ok", str(big + 1))


def test_type_error_has_path():
    m = Machine(transform_program(parse_program("(def::ung g (x) (if (= x 0) (car x) (g (1- x))))"))["g"].generated(),
                "python")
    with pytest.raises(DynamicTypeError) as e:
        m.call("mg", [3], safety_cap=100)
    assert e.value.path.startswith("mg:")


def test_cons_programs_run_on_python_backend():
    text = "(def::ung len (l) (if (consp l) (1+ (len (cdr l))) 0))"
    results = transform_program(parse_program(text))
    m = Machine(results["len"].generated())
    lst = None
    for i in range(5):
        from stepindex.values import Pair
        lst = Pair(i, lst)
    assert m.call("mlen", [lst], safety_cap=100) == 5


def test_disassembly_mentions_every_function(ack_engines):
    results, (m, _, _) = ack_engines
    text = m.code.disassemble()
    for g in results["ack"].generated():
        assert g.name in text


def test_unknown_function(ack_engines):
    _, (m, _, _) = ack_engines
    with pytest.raises(EvaluationError):
        m.call("nope", [], safety_cap=10)


_tests = st.sampled_from(["(= x 0)", "(< x 3)", "(= x 7)", "(zp x)", "(< 5 x)"])
_base = st.sampled_from(["0", "x", "(1+ x)", "(* x 2)", "(- x 9)", "(max x 4)", "t", "nil", "(car x)"])
_rec = st.sampled_from(["(f (1- x))", "(f (f (1- x)))", "(+ (f (- x 2)) (f (1- x)))", "(1+ (f (- x 1)))",
                        "(f (+ x 1))", "(not (and (f (1- x)) (f (- x 2))))", "(not (or (f (1- x)) (f (- x 3))))"])


def _spines():
    leaf = st.one_of(_base, _rec)
    return st.recursive(leaf, lambda sub: st.tuples(_tests, sub, sub).map(
        lambda t: f"(if {t[0]} {t[1]} {t[2]})"), max_leaves=6)


@given(_spines(), st.integers(-4, 14), st.integers(0, 8))
def test_three_engines_agree(body, x, d):
    text = f"(def::ung f (x) (if (< x -3) 0 {body}))"
    results, es = engines(text)
    names = results["f"].names
    for name, args in [(names.fast, [x]), (names.indexed, [d, x]), (names.indexed_dom, [d, x])]:
        outs = [run(e, name, args, cap=60) for e in es]
        first = outs[0]
        for o in outs[1:]:
            assert o[0] == first[0]
            if first[0][0] == "ok":
                assert o[1] == first[1]
