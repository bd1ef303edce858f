import json

import numpy as np
import pytest

from borderopt.cli import EXIT_MAX_ORDER, EXIT_OK, EXIT_PARSE, EXIT_SOLVER, main


def test_running_example_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["running_example", "--json", str(out), "--trace"]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert np.abs(np.array(rep["minimizers"]["points"]) - [[1, 1], [2, 1]]).max() <= 1e-4
    assert rep["order_reached"] == 3
    assert {"f_star", "minimizer_basis", "minimizer_ideal_generators", "minimizer_border_basis", "trace"} <= set(rep)
    assert [(r["t"], r["p"], r["s"]) for r in rep["trace"]] == [(3, 14, 9)]
    text = capsys.readouterr().out
    assert "  3     14     9" in text


def test_unbalanced_parens(tmp_path):
    bad = tmp_path / "bad.pb"
    bad.write_text("vars x;\nminimize (x + 1;\n")
    assert main([str(bad)]) == EXIT_PARSE


def test_missing_file(tmp_path):
    assert main([str(tmp_path / "nope.pb")]) == EXIT_PARSE


def test_motzkin_order_cap():
    assert main(["motzkin", "--order-max", "3"]) == EXIT_MAX_ORDER


def test_sdpa_without_binary(tmp_path):
    rc = main(["running_example", "--solver", "sdpa-file", "--sdpa-dir", str(tmp_path)])
    assert rc == EXIT_SOLVER
    assert (tmp_path / "order3.dat-s").exists()


def test_infeasible_problem(tmp_path):
    p = tmp_path / "inf.pb"
    p.write_text("vars x; minimize x; x - 1 >= 0; -x - 1 >= 0;")
    assert main([str(p)]) == EXIT_SOLVER


def test_export(tmp_path, capsys):
    dest = tmp_path / "m.dat-s"
    assert main(["motzkin", "--order-min", "4", "--export-sdpa", str(dest)]) == EXIT_OK
    assert "s=15, p=25" in capsys.readouterr().out
    assert dest.exists()


def test_gradient_ideal_flag_forms(tmp_path):
    p = tmp_path / "q.pb"
    p.write_text("vars x y; minimize x^2 + y^2;")
    assert main([str(p), "--gradient-ideal"]) == EXIT_OK
    assert main([str(p), "--gradient-ideal=off"]) == EXIT_OK


def test_list_corpus(capsys):
    assert main(["--list-corpus"]) == EXIT_OK
    assert "motzkin" in capsys.readouterr().out
