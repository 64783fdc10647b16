from __future__ import annotations

import csv
import io
import json

import mpmath
import pytest

from contcomp.cli import run
from contcomp.radicals import load_corpus

mp = mpmath.mpf


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv, "--output", "json")
    assert code == 0, err
    return json.loads(out)


def test_pi_catalan():
    data = call_json("pi", "--method", "catalan", "--n", "20")
    assert abs(mp(data["value"]) - mpmath.pi) < mp("1e-10")


@pytest.mark.parametrize("method", ["viete", "euler", "osler"])
def test_pi_methods(method):
    data = call_json("pi", "--method", method, "--n", "20")
    assert abs(mp(data["value"]) - mpmath.pi) < mp("1e-10")


def test_pi_bounds():
    code, out, _ = call("pi", "--method", "bounds", "--n", "5")
    assert code == 0 and "lower" in out


def test_expand_cot_integer():
    code, out, _ = call("expand", "cot", "--x", "5")
    assert code == 0
    assert "digits: 5" in out and "terminated: True" in out


@pytest.mark.parametrize(
    "argv, needle",
    [
        (("expand", "fexp", "--x", "sqrt(2)-1", "--digits", "5"), "digits: 2 2 2 2 2"),
        (("expand", "beta", "--x", "0.625", "--beta", "2", "--digits", "3"), "digits: 1 0 1"),
        (("expand", "signs", "--x", "2", "--depth", "4"), "+++++"),
        (("expand", "sizer", "--x", "2", "--depth", "3"), "tail: 2 2 2"),
    ],
)
def test_expand_codecs(argv, needle):
    code, out, err = call(*argv)
    assert code == 0, err
    assert needle in out


def test_corpus_run_shipped_file():
    code, out, _ = call("corpus", "run", "identities.corpus", "--output", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == len(load_corpus())
    assert all(r["status"] == "pass" for r in rows)


def test_corpus_failure_exit_code(tmp_path):
    path = tmp_path / "bad.corpus"
    path.write_text("id: wrong\nkind: sqrt\nterms: const:a=2\ndepth: 20\nrhs: 3\ntol: 1e-9\n")
    code, out, _ = call("corpus", "run", str(path))
    assert code == 1 and "wrong" in out


def test_eval_and_limit():
    data = call_json("eval", "--terms", "ramanujan1", "--depth", "30")
    assert abs(mp(data["value"]) - 3) < mp("1e-6")
    data = call_json("limit", "--terms", "const:a=1", "--tol", "1e-20", "--max-depth", "200")
    assert abs(mp(data["value"]) - (1 + mpmath.sqrt(5)) / 2) < mp("1e-19")


def test_limit_divergence_exit_code():
    code, out, err = call("limit", "--kind", "power:p=2", "--terms", "const:a=0.3", "--max-depth", "500")
    assert code == 1
    assert err.startswith("NoConvergence:")
    assert out == ""


def test_classify_all_and_power():
    data = call_json("classify", "--terms", "const:a=0.3", "--p", "2")
    verdicts = {row["criterion"]: row["verdict"] for row in data["table"]}
    assert verdicts["jones-liminf"] == "Diverges"
    assert verdicts["herschfeld"] == "Converges"


def test_classify_single_criterion():
    data = call_json("classify", "--terms", "dexp:base=2,q=3", "--criterion", "herschfeld")
    assert [row["verdict"] for row in data["table"]] == ["Diverges"]


def test_solve_trinomial_and_fixed_point():
    data = call_json("solve", "trinomial", "--m", "3", "--n", "1", "--p", "-7", "--q", "7", "--algorithm", "A", "--tol", "1e-20")
    assert abs(mp(data["root"]) - mp("1.35689586789220944389439951")) < mp("1e-18")
    data = call_json("solve", "fixed-point", "--f", "sqrt(6+x)", "--x0", "0")
    assert abs(mp(data["root"]) - 3) < mp("1e-12")
    assert data["approach"] == "monotone"


def test_constants_get_and_list():
    data = call_json("constants", "get", "kasner")
    assert abs(mp(data["value"]) - mp("1.757933")) < mp("5e-7")
    code, out, _ = call("constants", "list")
    assert code == 0 and "lemniscate" in out


def test_log_and_lemniscate():
    data = call_json("log", "--x", "4")
    assert abs(mp(data["value"]) - mpmath.log(4)) < mp("1e-9")
    data = call_json("lemniscate")
    assert abs(mp(data["L"]) - mp("2.6220575542")) < mp("1e-8")


@pytest.mark.parametrize(
    "argv",
    [("bogus",), ("pi", "--method", "nope"), ("eval", "--terms", "const:a=1"), ("constants", "get")],
)
def test_usage_errors_exit_two(argv):
    code, out, _ = call(*argv)
    assert code == 2 and out == ""


def test_unknown_constant_exit_one():
    code, _, err = call("constants", "get", "nope")
    assert code == 1 and err.startswith("UnknownConstant:")


def test_json_is_deterministic():
    argv = ("classify", "--terms", "arith:start=1,step=1", "--output", "json")
    assert call(*argv)[1] == call(*argv)[1]


def test_precision_flag_changes_digits():
    lo = call_json("pi", "--precision", "64")
    hi = call_json("pi", "--precision", "256")
    assert len(hi["value"]) > len(lo["value"])


def test_precision_from_environment(monkeypatch):
    monkeypatch.setenv("CONTCOMP_PRECISION", "64")
    lo = call_json("pi")
    monkeypatch.setenv("CONTCOMP_PRECISION", "256")
    assert len(call_json("pi")["value"]) > len(lo["value"])
