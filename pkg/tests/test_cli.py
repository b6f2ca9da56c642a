import csv
import io

import pytest

from spectral_bb.cli import main


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_dynamics_example(capsys):
    assert main(["dynamics", "--lambda", "100", "--m", "1", "--eps0", "2", "--eps1", "3",
                 "--steps", "5"]) == 0
    out = rows(capsys.readouterr().out)
    assert float(out[1]["eps"]) == 0.75


def test_rosenbrock_example(capsys):
    assert main(["rosenbrock", "--c", "100", "--eps", "1e-1", "--rules", "pbb"]) == 0
    (r,) = rows(capsys.readouterr().out)
    assert r["status"] == "Converged"
    assert abs(int(r["fevals"]) - 67) <= 0.25 * 67


def test_missing_rules_is_config_error(capsys):
    assert main(["quad"]) == 2
    err = capsys.readouterr().err
    assert "usage:" in err and "--rules" in err


@pytest.mark.parametrize("argv", [
    ["quad", "--rules", "zzz"],
    ["nonquad", "--rules", "pbb", "--functions", "Nope"],
    ["dynamics", "--lambda", "0.5", "--m", "1", "--eps0", "2", "--eps1", "3"],
    ["profile", "--input", "/nonexistent/records.csv"],
    ["frobnicate"],
])
def test_config_errors_exit_2(argv):
    assert main(argv) == 2


def test_runtime_failure_exits_1(tmp_path):
    out = tmp_path / "missing-dir" / "x.csv"
    assert main(["rosenbrock", "--rules", "pbb", "--out", str(out)]) == 1


def test_suite_to_file_then_profile(tmp_path):
    rec = tmp_path / "rec.csv"
    prof = tmp_path / "prof.csv"
    assert main(["quad", "--n", "30", "--kappa", "100", "--reps", "2", "--rules", "pbb,bb1",
                 "--eps", "1e-6", "--out", str(rec)]) == 0
    assert len(rows(rec.read_text())) == 4
    assert (tmp_path / "rec.meta.json").exists()
    assert main(["profile", "--input", str(rec), "--out", str(prof)]) == 0
    first = prof.read_bytes()
    assert main(["profile", "--input", str(rec), "--out", str(prof)]) == 0
    assert prof.read_bytes() == first
    assert {r["rule"] for r in rows(first.decode())} == {"pbb", "bb1"}


def test_env_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("SPECTRAL_BB_OUT", str(tmp_path))
    assert main(["bvp", "--n", "40", "--rules", "pbb,atc"]) == 0
    out = rows((tmp_path / "bvp.csv").read_text())
    assert {r["rule"] for r in out} == {"pbb", "atc"}


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# rosenbrock settings\nrules = bb1\neps = 1e-2\nc = 100\n")
    assert main(["rosenbrock", "--config", str(cfg)]) == 0
    (r,) = rows(capsys.readouterr().out)
    assert r["rule"] == "bb1" and float(r["eps"]) == 1e-2
    assert main(["rosenbrock", "--config", str(cfg), "--rules", "pbb"]) == 0
    (r,) = rows(capsys.readouterr().out)
    assert r["rule"] == "pbb"


def test_nonquad_subcommand(capsys):
    assert main(["nonquad", "--functions", "DQDRTIC,Diagonal4", "--rules", "pbb,bb2",
                 "--eps", "1e-5"]) == 0
    assert len(rows(capsys.readouterr().out)) == 4
