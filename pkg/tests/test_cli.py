import io
import json
import subprocess
import sys

import pytest

from hybridsat.cli import main
from hybridsat.formula import parse, unparse
from hybridsat.kripke import KripkeModel, check
from hybridsat.reductions import QBF_EXAMPLE, gen_qbf

K1 = {"states": ["w1", "w2"], "rel": [["w1", "w2"]], "labels": {"p:p": ["w2"]}}
K2 = {"states": ["s", "a", "b"], "rel": [["s", "a"], ["s", "b"], ["a", "b"]], "labels": {"n:s": ["s"]}}


def run(capsys, monkeypatch, argv, stdin=""):
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    def write(name, content):
        p = tmp_path / name
        p.write_text(content if isinstance(content, str) else json.dumps(content))
        return str(p)

    return write


@pytest.mark.parametrize(
    "argv, label",
    [
        (["--ops", "dia,down", "--base", "and,or,not", "--frames", "all"], "coRE-complete"),
        (["--ops", "dia,box,down,at", "--base", "not", "--frames", "total"], "L-complete"),
        # {id} is 1-reproducing, so the trivial cell wins over almost-trivial
        (["--ops", "dia,down", "--base", "id", "--frames", "er"], "trivial"),
        (["--ops", "dia,down", "--base", "id,0", "--frames", "er"], "almost-trivial"),
    ],
)
def test_classify(capsys, monkeypatch, argv, label):
    code, out, _ = run(capsys, monkeypatch, ["classify", *argv])
    assert code == 0
    assert out.strip().splitlines()[-1].startswith(label)


def test_classify_json(capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, ["classify", "--ops", "dia", "--base", "f#0001/2", "--json"])
    data = json.loads(out)
    # ∧ is 1-reproducing
    assert code == 0 and data["procedure"] == "decide_r1" and data["label"] == "trivial"
    assert set(data["report"]) == {"subsetOf", "contains", "bfWithTrue"}


@pytest.mark.parametrize("argv", [["--ops", "dia", "--base", "nand"], ["--ops", "next", "--base", "and"], ["--ops", "dia", "--base", "and", "--frames", "acyclic"]])
def test_classify_errors(capsys, monkeypatch, argv):
    code, _, err = run(capsys, monkeypatch, ["classify", *argv])
    assert code == 2 and err


def test_solve(capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, ["solve", "-", "--frames", "er"], "down x . not x")
    assert code == 1 and out.startswith("unsat")
    code, out, _ = run(capsys, monkeypatch, ["solve", "-"], "down x . x")
    assert code == 0 and out.startswith("sat")


def test_solve_qbf_over_trans(capsys, monkeypatch, files):
    path = files("q.txt", unparse(gen_qbf(QBF_EXAMPLE)))
    code, out, _ = run(capsys, monkeypatch, ["solve", path, "--frames", "trans", "--json"])
    data = json.loads(out)
    assert code == 0 and data["answer"] == "sat" and data["witness"] is not None


def test_solve_unknown_is_exit_3(capsys, monkeypatch):
    # full Boolean base with binder and diamond: only the bounded oracle applies
    code, out, _ = run(capsys, monkeypatch, ["solve", "-", "--bound", "2", "--json"], "down x . dia (dia x & not x) & box not dia x")
    assert code == 3 and json.loads(out)["answer"] == "unknown"


def test_solve_errors(capsys, monkeypatch, files):
    assert run(capsys, monkeypatch, ["solve", "-"], "down x . (")[0] == 2
    assert run(capsys, monkeypatch, ["solve", "/nonexistent/f"])[0] == 2
    assert run(capsys, monkeypatch, ["solve", "-", "--bound", "0"], "p")[0] == 2


def test_check(capsys, monkeypatch, files):
    k1, k2 = files("k1.json", K1), files("k2.json", K2)
    code, out, _ = run(capsys, monkeypatch, ["check", k1, files("f1", "dia p"), "--state", "w1"])
    assert code == 0 and out.strip() == "true"
    code, out, _ = run(capsys, monkeypatch, ["check", k1, files("f2", "box 0"), "--state", "w1"])
    assert code == 1 and out.strip() == "false"
    code, _, _ = run(capsys, monkeypatch, ["check", k2, files("f3", unparse(gen_qbf(QBF_EXAMPLE))), "--state", "s"])
    assert code == 0
    code, _, _ = run(capsys, monkeypatch, ["check", k2, files("f4", "dia x:y"), "--state", "a", "--assign", "y=b"])
    assert code == 0


def test_check_errors(capsys, monkeypatch, files):
    k1 = files("k1.json", K1)
    assert run(capsys, monkeypatch, ["check", k1, files("f", "x:y")])[0] == 2
    assert run(capsys, monkeypatch, ["check", k1, files("g", "p"), "--state", "w9"])[0] == 2
    assert run(capsys, monkeypatch, ["check", files("bad.json", "{"), files("h", "p")])[0] == 2
    bad_nom = {"states": [0, 1], "labels": {"n:i": [0, 1]}}
    assert run(capsys, monkeypatch, ["check", files("n.json", bad_nom), files("i", "p")])[0] == 2


def test_gen(capsys, monkeypatch, files):
    code, out, _ = run(capsys, monkeypatch, ["gen", "parity", "11"])
    formula, sidecar = out.strip().splitlines()
    assert code == 0 and formula == "down x . not not x" and json.loads(sidecar)["label"] == "sat"
    code, out, _ = run(capsys, monkeypatch, ["gen", "ord", "a b ; a b", "--json"])
    assert code == 0 and json.loads(out)["label"] == "sat"
    code, out, _ = run(capsys, monkeypatch, ["gen", "qbf", "-"], "e 1 0\na 2 0\ne 3 0\na 4 0\n1 -2 0\n-1 2 3 -4 0\n")
    assert out.splitlines()[0] == unparse(gen_qbf(QBF_EXAMPLE))
    path = files("dag.txt", "2 1 2\n1 2\n")
    code, out, _ = run(capsys, monkeypatch, ["gen", "unreach", path])
    assert code == 0 and json.loads(out.splitlines()[1])["label"] == "unsat"


def test_gen_is_deterministic(capsys, monkeypatch):
    a = run(capsys, monkeypatch, ["gen", "ordneg", "a b c ; c a"])[1]
    b = run(capsys, monkeypatch, ["gen", "ordneg", "a b c ; c a"])[1]
    assert a == b


def test_gen_errors(capsys, monkeypatch):
    assert run(capsys, monkeypatch, ["gen", "parity", "12"])[0] == 2
    assert run(capsys, monkeypatch, ["gen", "ord", "a b"])[0] == 2
    assert run(capsys, monkeypatch, ["gen", "nope", "1"])[0] == 2


def test_oracle(capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, ["oracle", "-", "--frames", "all", "--bound", "1"], "box 0")
    assert code == 0 and "model" in json.loads(out)
    code, out, _ = run(capsys, monkeypatch, ["oracle", "-", "--frames", "total", "--bound", "3"], "box 0")
    assert code == 3 and "not-found" in out
    code, out, _ = run(capsys, monkeypatch, ["oracle", "-", "--frames", "er", "--bound", "2"], "down x . dia not x")
    assert code == 0


def test_witness_json_round_trips(capsys, monkeypatch, files):
    code, out, _ = run(capsys, monkeypatch, ["oracle", "-", "--frames", "er", "--bound", "3", "--json"], "down x . dia (p & not x)")
    w = json.loads(out)["witness"]
    K = KripkeModel.from_json(w["model"])
    assert check(K, w["assignment"], w["state"], parse("down x . dia (p & not x)"))


def test_module_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "hybridsat", "gen", "parity", "1"], capture_output=True, text=True, check=False
    )
    assert r.returncode == 0 and r.stdout.startswith("down x . not x")


def test_help_exits_zero(capsys, monkeypatch):
    assert run(capsys, monkeypatch, ["--help"])[0] == 0
    assert run(capsys, monkeypatch, [])[0] == 2
