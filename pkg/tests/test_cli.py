import json
import subprocess
import sys

import pytest

from goimall.cli import run

from helpers import DATA

PI1, FAM = str(DATA / "prologue_pi1.gm"), str(DATA / "prologue.json")


def cli(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check(capsys):
    assert cli(capsys, "check", PI1)[:2] == (0, "|- [((1 & 1), (bot + bot))] bot, 1\n")


def test_check_rejects_bad_proof(capsys, tmp_path):
    bad = tmp_path / "bad.gm"
    bad.write_text("(cut (ax 1) (ax 0))")
    code, out, _ = cli(capsys, "check", str(bad))
    assert code == 1 and out.startswith("FAIL cut formulas not dual")


def test_interp_modes(capsys):
    assert cli(capsys, "interp", PI1)[1] == "[(1.*|1.*)] *, *\n[(2.*|1.*)] *, *\n"
    assert cli(capsys, "interp", PI1, "--mode", "denot")[1] == "*, *\n"


def test_translate(capsys):
    out = cli(capsys, "translate", PI1, "--family", FAM)[1]
    assert out == "|-{1,2} [ (1{1} & 1{2}, bot{1,2} + bot{}) ] bot{1,2}, 1{1,2}\n"


def test_normalize_trace(capsys):
    code, out, _ = cli(capsys, "normalize", PI1, "--family", FAM, "--trace")
    assert code == 0
    assert out.splitlines() == [
        "step 1: WithPlus(1)@root  J: {1,2} -> {1}  dropped: {2}",
        "step 2: AxCut@root  J: {1} -> {1}  dropped: {}",
        "(ex (ax 1) 0 1)",
    ]


def test_exec_json_either_side(capsys):
    for argv in (["--json", "exec", PI1, "--family", FAM], ["exec", PI1, "--family", FAM, "--json"]):
        code, out, _ = cli(capsys, *argv)
        assert code == 0
        assert json.loads(out) == {"1": [[[0, ""], [1, ""]], [[1, ""], [0, ""]]], "2": "ZERO"}


def test_verify(capsys):
    code, out, _ = cli(capsys, "verify", PI1, "--family", FAM)
    assert code == 0 and out.splitlines()[-1] == "PASS"


def test_verify_enumerate_small(capsys):
    code, out, _ = cli(capsys, "verify", "--enumerate", "3", "--samples", "5")
    assert code == 0
    assert out.splitlines()[-1] == "PASS"
    assert "zero-action cascade differences: 0" in out


def test_axioms(capsys):
    code, out, _ = cli(capsys, "axioms", "--samples", "20")
    assert code == 0 and out.splitlines()[-1] == "7/7 axiom families PASS"


def test_diagram(capsys, tmp_path):
    dot = tmp_path / "x.dot"
    assert cli(capsys, "diagram", PI1, "--family", FAM, "--index", "2", "-o", str(dot))[0] == 0
    text = dot.read_text()
    assert text.startswith("digraph box {") and 'color="red"' in text


@pytest.mark.parametrize("argv", [["check", "/nonexistent.gm"], ["bogus"], ["verify"],
                                  ["diagram", PI1, "--index", "9"]])
def test_usage_errors_exit_2(capsys, argv):
    assert cli(capsys, *argv)[0] == 2


def test_family_point_must_belong(capsys, tmp_path):
    fam = json.loads(open(FAM).read())
    fam["values"]["1"]["ctx"] = ["*", "*", "*"]
    path = tmp_path / "f.json"
    path.write_text(json.dumps(fam))
    code, _, err = cli(capsys, "exec", PI1, "--family", str(path))
    assert code == 2 and "not a point of the proof" in err


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "goimall.cli", "check", PI1], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("|- [")
