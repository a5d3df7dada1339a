import io
import json
import subprocess
import sys

import pytest

from agparse.cli import main

from conftest import GOLDEN, GRAMMARS


def run(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def grammar(name):
    return str(GRAMMARS / name)


def test_score_output():
    code, out, _ = run("parse", "--grammar", grammar("binary.acfg"), "--input", "x x", "--output", "score")
    assert code == 0 and out.strip() == "0.144"


def test_tree_output_for_wh_question():
    code, out, _ = run("parse", "--grammar", grammar("wh.mg"), "--input", "what the cooks cooked", "--output", "tree")
    assert code == 0
    lines = out.splitlines()
    assert lines[:2] == ["# recognized: true", "# score: 1"]
    assert lines[2].startswith("(c [move_1] (+wh c, -wh [merge_R1] (=v +wh c [lex] <eps>)")


def test_unknown_token_warns_and_exits_2():
    code, out, err = run("parse", "--grammar", grammar("binary.acfg"), "--input", "x y")
    assert code == 2
    assert "warning: unknown token 'y' at 2" in err
    assert json.loads(out)["recognized"] is False


def test_stdin_and_semirings(monkeypatch):
    code, out, _ = run("parse", "--grammar", grammar("binary.acfg"), "--stdin", "--semiring", "viterbi",
                       "--output", "score", stdin="x x x\n", monkeypatch=monkeypatch)
    assert code == 0 and float(out) == pytest.approx(0.4 ** 2 * 0.6 ** 3)
    code, out, _ = run("parse", "--grammar", grammar("wh.mg"), "--input", "cooks the", "--semiring", "bool",
                       "--output", "score")
    assert code == 2 and out.strip() == "false"


def test_usage_errors_exit_64(capsys):
    with pytest.raises(SystemExit) as info:
        main(["parse", "--grammar", grammar("binary.acfg")])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["parse", "--grammar", grammar("binary.acfg"), "--input", "x", "--semiring", "tropical"])
    assert info.value.code == 64
    assert "usage:" in capsys.readouterr().err


def test_load_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.acfg"
    bad.write_text("start S\nr: S -> 'x' @ 0.5\n")
    code, _, err = run("parse", "--grammar", str(bad), "--input", "x")
    assert code == 1 and "mass 0.5" in err
    code, _, err = run("parse", "--grammar", str(tmp_path / "missing.acfg"), "--input", "x")
    assert code == 1 and "error:" in err


def test_budget_abort_exit_1():
    code, _, err = run("parse", "--grammar", grammar("binary.acfg"), "--input", "x x x x", "--budget", "5")
    assert code == 1 and "aborted" in err


def test_oracle_listing():
    code, out, _ = run("oracle", "--grammar", grammar("binary.acfg"), "--max-len", "2")
    assert code == 0
    assert out.splitlines() == ["x\t0.6", "x x\t0.144", "# residual <= 0 after 3 steps"]


def test_oracle_cycle_residual():
    code, out, _ = run("oracle", "--grammar", grammar("unary_cycle.acfg"), "--max-len", "1", "--max-steps", "50")
    lines = out.splitlines()
    assert lines[0] == "x\t1"
    residual = float(lines[1].split()[3])
    assert residual == pytest.approx(0.3 ** 50, rel=1e-5)


def test_oracle_rejects_empty_and_mg_grammars(tmp_path):
    empty = tmp_path / "empty.acfg"
    empty.write_text("# nothing here\n")
    code, _, err = run("oracle", "--grammar", str(empty), "--max-len", "2")
    assert code == 1 and "empty" in err
    code, _, err = run("oracle", "--grammar", grammar("wh.mg"), "--max-len", "2")
    assert code == 1


@pytest.mark.parametrize("golden,grammar_file,sentence", [
    ("wh_what_the_cooks_cooked.json", "wh.mg", "what the cooks cooked"),
    ("wh_rejected.json", "wh.mg", "the cooks cooked what"),
    ("binary_x_x.json", "binary.acfg", "x x"),
    ("anbncn_aabbcc.json", "anbncn.mcfg", "a a b b c c"),
])
def test_json_matches_golden(golden, grammar_file, sentence):
    _, out, _ = run("parse", "--grammar", grammar(grammar_file), "--input", sentence)
    assert out == (GOLDEN / golden).read_text(encoding="utf-8")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "agparse", "parse", "--grammar", grammar("binary.acfg"),
                           "--input", "x", "--output", "score"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.6"
