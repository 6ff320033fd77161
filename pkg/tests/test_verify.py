import pytest

from stepindex.surface import parse_program
from stepindex.transform import transform_program
from stepindex.values import render
from stepindex.verify import (
    CHECKS,
    MUTATIONS,
    CheckPlan,
    Session,
    mutate,
    recursive_calls,
    run_all_checks,
)

from conftest import ACK_PLAIN, corpus_text
import oracle

SMALL = dict(random_samples=30, safety_cap=20_000)


def test_plan_validation():
    with pytest.raises(ValueError):
        CheckPlan(grid=((3, 1),))
    with pytest.raises(ValueError):
        CheckPlan(grid=((0, 1),), depth_range=(4, 2))
    with pytest.raises(ValueError):
        CheckPlan(grid=((0, 1),), random_samples=-1)


def test_plan_samples_are_seeded():
    a = CheckPlan(grid=((-1, 3), (-1, 6)), seed=0).samples()
    assert a == CheckPlan(grid=((-1, 3), (-1, 6)), seed=0).samples()
    assert a != CheckPlan(grid=((-1, 3), (-1, 6)), seed=1).samples()
    assert len(a) == 200
    assert all(-1 <= x <= 3 and -1 <= y <= 6 and 0 <= d1 <= 48 for d1, _, (x, y) in a)


def test_grid_must_match_arity():
    with pytest.raises(ValueError):
        Session(parse_program(ACK_PLAIN), "ack", CheckPlan(grid=((0, 1),)))


@pytest.mark.parametrize("name, grid", [
    ("ack", ((-1, 2), (-1, 4))),
    ("f91", ((-5, 110),)),
    ("half", ((-3, 12),)),
])
def test_suite_passes_on_corpus(name, grid):
    reports = run_all_checks(parse_program(corpus_text(name)), name, CheckPlan(grid=grid, **SMALL))
    assert [r.name for r in reports] == list(CHECKS)
    for r in reports:
        assert r.status == "pass", (r.name, r.failures[:3])
    assert sum(r.instances_checked for r in reports) > 0


def test_determinism_and_stability_on_natural_grid():
    plan = CheckPlan(grid=((0, 3), (0, 6)), depth_range=(0, 10), random_samples=0)
    for r in run_all_checks(parse_program(ACK_PLAIN), "ack", plan, only=["determinism", "stability"]):
        assert r.status == "pass"


def test_recursive_call_sites_ack():
    s = Session(parse_program(ACK_PLAIN), "ack", CheckPlan(grid=((0, 2), (0, 2))))
    assert recursive_calls(s, (2, 2)) == [(2, 1), (1, oracle.ack(2, 1))]
    assert recursive_calls(s, (0, 4)) == []
    assert s.measure((2, 1)) < s.measure((2, 2)) and s.measure((1, oracle.ack(2, 1))) < s.measure((2, 2))


def test_recursive_call_sites_nested():
    p = parse_program("(def::ung f (x) (if (= x 0) 0 (f (f (1- x)))))")
    s = Session(p, "f", CheckPlan(grid=((0, 5),)))
    assert recursive_calls(s, (3,)) == [(2,), (0,)]
    (r,) = run_all_checks(p, "f", CheckPlan(grid=((-1, 6),), **SMALL), only=["measure-decrease"])
    assert r.status == "pass" and r.instances_checked == 12


def test_measure_equation_at_base_points():
    s = Session(parse_program(ACK_PLAIN), "ack", CheckPlan(grid=((0, 0), (-1, 3))))
    eq = s.result.derived.measure_equation
    for y in range(-1, 4):
        lhs, rhs = s.aux(eq.lhs, (0, y)), s.aux(eq.rhs, (0, y))
        assert lhs.value == rhs.value == 0


def test_exported_equation_off_domain_with_small_big():
    p = parse_program(corpus_text("ack"))
    plan = CheckPlan(grid=((-1, -1), (0, 0)), big=4, **SMALL)
    s = Session(p, "ack", plan)
    eq = s.result.derived.exported_equation
    lhs, rhs = s.aux(eq.lhs, (-1, 0)), s.aux(eq.rhs, (-1, 0))
    assert lhs.ok and lhs.same(rhs)
    assert lhs.value == s.executor.comp_eval("ack", 4, [-1, 0])


@pytest.mark.parametrize("kind", MUTATIONS)
def test_every_mutation_is_caught(kind):
    p = parse_program(corpus_text("ack"))
    results = transform_program(p)
    results["ack"] = mutate(results["ack"], kind)
    # base-true makes the indexed domain exponential in the index, so stay shallow
    plan = CheckPlan(grid=((-1, 2), (-1, 3)), depth_range=(0, 8), random_samples=10, safety_cap=20_000)
    only = ["determinism", "stability", "defining-equations", "measure-decrease"]
    reports = run_all_checks(p, "ack", plan, results=results, only=only)
    assert sum(len(r.failures) for r in reports) >= 1, kind


def test_failures_replay():
    p = parse_program(corpus_text("ack"))
    results = transform_program(p)
    results["ack"] = mutate(results["ack"], "default-per-branch")
    s = Session(p, "ack", CheckPlan(grid=((0, 2), (0, 3)), random_samples=0), results=results)
    rep = CHECKS["determinism"](s)
    assert rep.status == "fail"
    f = rep.failures[0]
    inputs = dict(f.inputs)
    args = (int(inputs["x"]), int(inputs["y"]))
    d1, d2 = int(inputs["d1"]), int(inputs["d2"])
    fresh = Session(p, "ack", CheckPlan(grid=((0, 2), (0, 3))), results=results)
    assert fresh.dom(d1, args) and fresh.dom(d2, args)
    assert (render(fresh.fn(d1, args)), render(fresh.fn(d2, args))) == (f.lhs, f.rhs)
    assert f.as_dict()["inputs"]["x"] == inputs["x"]
    assert "vs" in str(f)


def test_unknown_mutation():
    with pytest.raises(ValueError):
        mutate(transform_program(parse_program(ACK_PLAIN))["ack"], "nope")


def test_signature_check():
    p = parse_program("(def::ung g (n) (declare (xargs :signature ((natp) natp))) (if (= n 0) -1 (g (1- n))))")
    (r,) = run_all_checks(p, "g", CheckPlan(grid=((-1, 3),), **SMALL), only=["signature"])
    assert r.status == "fail" and r.failures[0].rhs == "natp"


def test_report_dict():
    (r,) = run_all_checks(parse_program(ACK_PLAIN), "ack", CheckPlan(grid=((0, 1), (0, 1)), **SMALL),
                          only=["determinism"])
    d = r.as_dict()
    assert d["status"] == "pass" and d["check"] == "determinism" and d["instances"] == r.instances_checked
