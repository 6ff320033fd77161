import dataclasses

import pytest
from hypothesis import given, strategies as st

from stepindex.surface import parse_program
from stepindex.syntax import NIL, Var
from stepindex.totality import check_program_totality, check_total, lex_less, natural_less, relation_holds
from stepindex.verify import CheckPlan, Session, recursive_calls

from conftest import corpus_text


def test_lex_less_examples():
    assert lex_less((2, 9), (3, 0))
    assert lex_less((3, 1), (3, 2))
    assert not lex_less((3, 2), (3, 2))


def test_lex_less_nfix_and_arity():
    assert not lex_less((-5, 0), (0, 0))  # both coerce to (0 0)
    assert lex_less((-5, 0), (0, 1))
    with pytest.raises(ValueError):
        lex_less((1,), (1, 2))


def test_natural_relation():
    assert natural_less(0, 1) and not natural_less(-3, 0)
    with pytest.raises(ValueError):
        relation_holds("natural-less", (1, 2), (3, 4))


nat_tuples = st.lists(st.integers(0, 5), min_size=2, max_size=2).map(tuple)


@given(nat_tuples, nat_tuples, nat_tuples)
def test_lex_less_is_a_strict_order(a, b, c):
    assert not lex_less(a, a)
    assert not (lex_less(a, b) and lex_less(b, a))
    if lex_less(a, b) and lex_less(b, c):
        assert lex_less(a, c)
    assert lex_less(a, b) == (a < b)


@pytest.fixture(scope="module")
def ack_program():
    return parse_program(corpus_text("ack"))


def test_ack_total_on_small_natural_grid(ack_program):
    (spec,) = ack_program.totality_specs
    rep = check_total(ack_program, spec, CheckPlan(grid=((-1, 3), (-1, 4))))
    assert rep.status == "pass"
    assert rep.instances_checked == 4 * 5  # predicate points only


def test_wrong_measure_fails_at_a_call(ack_program):
    (spec,) = ack_program.totality_specs
    bad = dataclasses.replace(spec, measure=(Var("y"), Var("x")))
    rep = check_total(ack_program, bad, CheckPlan(grid=((0, 2), (0, 3))))
    assert rep.status == "fail"
    first = rep.failures[0]
    assert dict(first.inputs) == {"x": "1", "y": "0"}
    assert "measure not smaller" in first.detail


def test_vacuous_predicate(ack_program):
    (spec,) = ack_program.totality_specs
    rep = check_total(ack_program, dataclasses.replace(spec, predicate=NIL), CheckPlan(grid=((-1, 3), (-1, 6))))
    assert rep.status == "pass" and rep.instances_checked == 0


def test_predicate_outside_domain_is_reported(ack_program):
    (spec,) = ack_program.totality_specs
    from stepindex.surface import parse_expr
    loose = dataclasses.replace(spec, predicate=parse_expr("(natp y)", ("x", "y")))
    rep = check_total(ack_program, loose, CheckPlan(grid=((-1, 0), (0, 1)), domain_cap=64))
    assert any(f.detail == "predicate without domain" for f in rep.failures)


def test_predicate_closure(ack_program):
    # every call made from a predicate point satisfies the predicate again
    s = Session(ack_program, "ack", CheckPlan(grid=((0, 3), (0, 4))))
    for args in s.plan.points():
        for call in recursive_calls(s, args):
            assert all(type(v) is int and v >= 0 for v in call)


def test_f91_total():
    p = parse_program(corpus_text("f91"))
    (rep,) = check_program_totality(p, CheckPlan(grid=((-20, 120),)))
    assert rep.status == "pass" and rep.instances_checked == 141
    assert rep.name == "total:f91-terminates"


def test_program_without_total_forms():
    assert check_program_totality(parse_program(corpus_text("half")), CheckPlan(grid=((0, 4),))) == []
