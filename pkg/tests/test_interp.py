import pytest
from hypothesis import given, strategies as st

from stepindex.interp import InDomain, Interpreter, NotInDomainUpTo, TreeEvaluator
from stepindex.stats import EvalStats
from stepindex.surface import parse_program

from conftest import ACK_PLAIN, corpus_text
import oracle


@pytest.fixture(scope="module")
def ip():
    return Interpreter(parse_program(ACK_PLAIN))


def test_indexed_fn_examples(ip):
    for x, y in [(0, 0), (3, 3), (-1, 7)]:
        assert ip.eval_indexed_fn("ack", 0, [x, y]) == y + 1
    for d in range(1, 6):
        assert ip.eval_indexed_fn("ack", d, [0, 5]) == 6
    assert ip.eval_indexed_fn("ack", 4, [1, 1]) == 3


def test_indexed_dom_examples(ip):
    assert ip.eval_indexed_dom("ack", 0, [0, 9])
    assert not ip.eval_indexed_dom("ack", 0, [1, 0])
    assert ip.eval_indexed_dom("ack", 1, [1, 0])
    assert not any(ip.eval_indexed_dom("ack", d, [-1, 0]) for d in range(65))


def test_find_witness_examples(ip):
    assert ip.find_witness_depth("ack", [0, 5], 64) == InDomain(0)
    assert ip.find_witness_depth("ack", [1, 0], 64) == InDomain(1)
    assert ip.find_witness_depth("ack", [-1, 0], 64) == NotInDomainUpTo(64)
    assert ip.find_witness_depth("ack", [0, -7], 0) == InDomain(0)


def test_find_witness_cap_is_respected(ip):
    w = ip.find_witness_depth("ack", [2, 2], 64).witness
    assert ip.find_witness_depth("ack", [2, 2], w) == InDomain(w)
    assert ip.find_witness_depth("ack", [2, 2], w - 1) == NotInDomainUpTo(w - 1)


def test_min_index_examples(ip):
    assert ip.min_index("ack", 7, [0, 5]) == 0
    assert ip.min_index("ack", 7, [1, 0]) == 1
    assert ip.min_index("ack", 7, [-1, 0]) == 0
    assert ip.min_index("ack", 0, [1, 0]) == 0


def test_measure_examples(ip):
    for y in range(-2, 5):
        assert ip.measure("ack", [0, y]) == 0
    assert ip.measure("ack", [1, 0]) == 1
    m = ip.measure("ack", [2, 2])
    assert m == 1 + max(ip.measure("ack", [2, 1]), ip.measure("ack", [1, oracle.ack(2, 1)]))
    assert ip.measure("ack", [-1, 0], 64) is None


def test_logic_examples(ip):
    assert ip.l_eval("ack", [0, 5]) == 6
    assert ip.l_eval("ack", [1, 1]) == 3
    assert ip.l_eval("ack", [-1, 0], 64) == 1
    assert ip.l_dom("ack", [0, -7]) == InDomain(0)
    assert ip.l_dom("ack", [-1, 0], 64) == NotInDomainUpTo(64)
    assert isinstance(ip.l_dom("ack", [3, 3]), InDomain)


def test_linear_search_budget(ip):
    assert ip.linear_witness_search("ack", [3, 3], 4096, budget=10) is None
    assert ip.linear_witness_search("ack", [3, 3], 4096) == ip.find_witness_depth("ack", [3, 3], 4096)


def test_stats_are_counted(ip):
    st_ = EvalStats()
    ip.eval_indexed_dom("ack", 8, [2, 1], st_)
    assert st_.call_count > 1 and st_.max_recursion_depth <= 9


def test_tree_evaluator_deep_recursion():
    p = parse_program("(def::ung down (n) (if (= n 0) 0 (1+ (down (1- n)))))")
    from stepindex.transform import transform_program
    te = TreeEvaluator(transform_program(p)["down"].generated(), safety_cap=200_000)
    assert te.call("mdown", [100_000]) == 100_000


small = st.tuples(st.integers(-1, 2), st.integers(-1, 4))


@given(small, st.integers(0, 12))
def test_indexed_defs_match_oracle(xy, d):
    x, y = xy
    ip = _shared()
    assert ip.eval_indexed_fn("ack", d, [x, y]) == oracle.iack(d, x, y)
    assert ip.eval_indexed_dom("ack", d, [x, y]) == oracle.iack_dom(d, x, y)


@given(small)
def test_witness_matches_oracle(xy):
    x, y = xy
    ip = _shared()
    w = oracle.least_witness(x, y, 64)
    verdict = ip.find_witness_depth("ack", [x, y], 64)
    assert verdict == (NotInDomainUpTo(64) if w is None else InDomain(w))
    assert ip.min_index("ack", 64, [x, y]) == (0 if w is None else oracle.min_index(64, x, y))


@given(small, st.integers(0, 12), st.integers(0, 12))
def test_determinism_and_stability(xy, d1, d2):
    x, y = xy
    ip = _shared()
    if ip.eval_indexed_dom("ack", d1, [x, y]):
        if d1 <= d2:
            assert ip.eval_indexed_dom("ack", d2, [x, y])
        if ip.eval_indexed_dom("ack", d2, [x, y]):
            assert ip.eval_indexed_fn("ack", d1, [x, y]) == ip.eval_indexed_fn("ack", d2, [x, y])


@given(st.integers(-20, 130))
def test_f91_logic_matches_brute_force(n):
    ip = _shared_f91()
    assert ip.l_eval("f91", [n]) == oracle.f91(n)


_cache = {}


def _shared():
    if "ack" not in _cache:
        _cache["ack"] = Interpreter(parse_program(ACK_PLAIN))
    return _cache["ack"]


def _shared_f91():
    if "f91" not in _cache:
        _cache["f91"] = Interpreter(parse_program(corpus_text("f91")), memo=True)
    return _cache["f91"]
