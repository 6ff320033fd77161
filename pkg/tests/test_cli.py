import json

import pytest

from stepindex.cli import main, parse_grid, UsageError

from conftest import corpus_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_grid():
    assert parse_grid("-1:3,-1:6", 2) == ((-1, 3), (-1, 6))
    assert parse_grid("0:4", 3) == ((0, 4),) * 3
    assert parse_grid("5", 1) == ((5, 5),)
    with pytest.raises(UsageError):
        parse_grid("3:1", 1)
    with pytest.raises(UsageError):
        parse_grid("a:b", 1)
    with pytest.raises(UsageError):
        parse_grid("0:1,0:1", 1)


def test_eval_transcript(capsys):
    assert run(capsys, "eval", corpus_path("ack"), "ack", "3", "8") == (0, "2045\n", "")


def test_eval_arity_error(capsys):
    code, out, err = run(capsys, "eval", corpus_path("ack"), "ack", "3")
    assert code == 2 and "expects 2 argument" in err


def test_eval_wrapper_and_domain(capsys):
    assert run(capsys, "eval", corpus_path("ack2"), "ack2-exec", "-1", "0")[:2] == (0, "1\n")
    assert run(capsys, "eval", corpus_path("ack"), "ack-domain", "2", "3")[:2] == (0, "t\n")
    code, out, err = run(capsys, "eval", corpus_path("ack"), "ack-domain", "-1", "0", "--safety-cap", "1000")
    assert code == 2 and "safety cap" in err


def test_eval_machine_readable(capsys):
    code, out, _ = run(capsys, "eval", corpus_path("f91"), "f91", "7", "--format", "machine-readable")
    assert code == 0 and json.loads(out) == {"function": "f91", "args": [7], "value": "91"}


def test_transform(capsys):
    code, out, _ = run(capsys, "transform", corpus_path("ack"))
    assert code == 0
    for name in ("iack", "iack-dom", "mack", "ack-domain", "comp-ack"):
        assert f"(defun {name} " in out


def test_transform_machine_readable_is_stable(capsys):
    a = run(capsys, "transform", corpus_path("f91"), "--format", "machine-readable")[1]
    b = run(capsys, "transform", corpus_path("f91"), "--format", "machine-readable")[1]
    assert a == b
    rec = json.loads(a)
    assert set(rec["definitions"]) == {"if91", "if91-dom", "mf91", "f91-domain", "comp-f91"}


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", corpus_path("ack"), "ack", "3", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split()[:4] == ["mode", "call_count", "prim_count", "max_recursion_depth"]
    assert [l.split()[0] for l in lines[1:]] == ["indexed", "fast", "domain", "wrapper"]


def test_bench_machine_readable(capsys):
    code, out, _ = run(capsys, "bench", corpus_path("ack"), "ack", "0", "5", "--format", "machine-readable")
    recs = [json.loads(l) for l in out.splitlines()]
    assert {r["mode"]: r["stats"]["call_count"] for r in recs} == {"indexed": 1, "fast": 1, "domain": 1, "wrapper": 2}


def test_check_passes(capsys):
    code, out, _ = run(capsys, "check", corpus_path("half"), "--grid=-3:10", "--seed", "7", "--samples", "20")
    assert code == 0
    assert all(line.startswith(("PASS", " ")) for line in out.splitlines())


def test_check_machine_readable_is_deterministic(capsys):
    argv = ("check", corpus_path("f91"), "--grid=80:105", "--samples", "30", "--format", "machine-readable")
    a, b = run(capsys, *argv)[1], run(capsys, *argv)[1]
    assert a == b
    assert all(json.loads(l)["status"] == "pass" for l in a.splitlines())


def test_total(capsys):
    code, out, _ = run(capsys, "total", corpus_path("ack"), "--grid=0:2,0:3")
    assert code == 0 and "natp-ack-terminates" in out


def test_total_failure_exit_code(tmp_path, capsys):
    src = tmp_path / "bad.lisp"
    src.write_text(open(corpus_path("ack")).read().replace("(llist x y)", "(llist y x)"))
    code, out, _ = run(capsys, "total", str(src), "--grid=0:2,0:3")
    assert code == 1 and "FAIL" in out


def test_parse_error_is_located(tmp_path, capsys):
    src = tmp_path / "broken.lisp"
    src.write_text("(def::ung f (x)\n  (if (= x 0) 0")
    code, _, err = run(capsys, "eval", str(src), "f", "1")
    assert code == 2 and "broken.lisp:2:3" in err


def test_usage_errors(capsys):
    assert run(capsys, "eval", corpus_path("ack"), "nope", "1")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "eval", "/nonexistent.lisp", "f", "1")[0] == 2
    assert run(capsys, "check", corpus_path("ack"), "--grid=0:1,0:1,0:1")[0] == 2
