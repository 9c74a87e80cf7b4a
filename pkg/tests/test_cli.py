"""CLI behavior: subcommands, exit codes, config handling, determinism."""

import json

import pytest

from steklovheat.cli import main


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


BASE = """
[problem]
m = 1
n = 2
[geometry]
type = ball
radius = 1.0
[compute]
max_l = 2
"""


def test_invariants_csv_and_exit_zero(tmp_path, capsys):
    cfg = _write(tmp_path, "c.ini", BASE)
    assert main(["invariants", "--config", cfg]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0].startswith("l,row,col,provenance")
    assert len(lines) == 4  # header + l = 0, 1, 2
    assert all("recursion|closed_form" in ln for ln in lines[1:])


def test_invariants_json_records(tmp_path, capsys):
    cfg = _write(tmp_path, "c.ini", BASE)
    assert main(["invariants", "--config", cfg, "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    provs = {r["provenance"] for r in data["records"]}
    assert provs == {"recursion", "closed_form"}
    assert data["worst_rel_diff"] <= 1e-8


def test_determinism(tmp_path, capsys):
    cfg = _write(tmp_path, "c.ini", BASE)
    main(["invariants", "--config", cfg])
    first = capsys.readouterr().out
    main(["invariants", "--config", cfg])
    second = capsys.readouterr().out
    assert first == second


def test_out_file(tmp_path, capsys):
    cfg = _write(tmp_path, "c.ini", BASE)
    out = tmp_path / "result.csv"
    assert main(["invariants", "--config", cfg, "--out", str(out)]) == 0
    assert out.read_text().startswith("l,row,col,provenance")


def test_missing_config_is_exit_3(capsys):
    assert main(["invariants", "--config", "/no/such/file.ini"]) == 3
    assert "config error" in capsys.readouterr().err


def test_bad_value_is_exit_3(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.ini", "[problem]\nm = banana\n")
    assert main(["invariants", "--config", cfg]) == 3


def test_max_l_beyond_expansion_is_exit_3(tmp_path):
    cfg = _write(tmp_path, "c.ini", "[problem]\nn = 2\n[compute]\nmax_l = 5\n")
    assert main(["invariants", "--config", cfg]) == 3


def test_n_below_2m_warns_but_runs(tmp_path, capsys):
    cfg = _write(
        tmp_path, "c.ini",
        "[problem]\nm = 2\nn = 2\n[geometry]\ntype = flat\n[compute]\nmax_l = 1\n",
    )
    assert main(["invariants", "--config", cfg]) == 0
    captured = capsys.readouterr()
    assert "n = 2 < 2m = 4" in captured.err


def test_verify_symbols(tmp_path, capsys):
    cfg = _write(
        tmp_path, "c.ini",
        "[problem]\nm = 1\nn = 2\n[geometry]\ntype = ball\n"
        "[potential]\nq0 = 0.5\ndq_normal = 0.3\n[compute]\ndepth = 3\n",
    )
    assert main(["verify-symbols", "--config", cfg, "--seed", "5"]) == 0
    out = capsys.readouterr().out
    assert "s_-4_jpart" in out


def test_ball_trace_requires_q_zero(tmp_path, capsys):
    cfg = _write(
        tmp_path, "c.ini",
        BASE + "[potential]\nq0 = 0.5\n",
    )
    assert main(["ball-trace", "--config", cfg]) == 3


def test_weyl_output(tmp_path, capsys):
    cfg = _write(
        tmp_path, "c.ini",
        BASE + "[verify]\nk_max = 700\nlambdas = 50.5,100.5\n",
    )
    assert main(["weyl", "--config", cfg, "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert abs(data["apparent_limit"] - 1.0) < 0.05


def test_moments_subcommand(tmp_path, capsys):
    cfg = _write(tmp_path, "c.ini", "[problem]\nn = 2\n")
    assert main(["moments", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "S[0 0]" in out
    assert "closed_form" in out


def test_defaults_without_config(capsys):
    # all-defaults run: m = 1, n = 2, ball R = 1, max_l = 2
    assert main(["invariants"]) == 0
    assert "recursion|closed_form" in capsys.readouterr().out
