import math

import numpy as np
import pytest

from hardyfem.cli import main
from hardyfem.io import OUTPUT_DIR_ENV, read_csv


def test_threshold_figure_example(tmp_path, capsys):
    assert main(["threshold", "--alpha", "7", "--drift", "1", "--lambda", "1", "--dim", "3", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "m_threshold = 8.1213" in out and "existence = ok" in out
    header, (m, F) = read_csv(tmp_path / "f_curve.csv")
    assert header == ["m", "F"] and m.size == 200
    assert m[0] == 6.0 and m[-1] == pytest.approx(3 * (6 + 3 * math.sqrt(2) / 2))
    np.testing.assert_allclose(F, 21 / m * (1 - 3 / m) + 0.5 * (6 / m - 1), atol=1e-12, rtol=0)
    assert (tmp_path / "f_curve.svg").read_text().lstrip().startswith("<?xml")


def test_threshold_hypothesis_failure_status_2(tmp_path, capsys):
    code = main(["threshold", "--alpha", "1", "--drift", "1", "--lambda", "0", "--dim", "3", "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "alpha*H^2 > A*H + lambda" in err and "0.25 <= 0.5" in err


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["threshold", "--alpha", "2", "--lambda", "0.1", "--no-svg"]) == 0
    assert (tmp_path / "f_curve.csv").exists()
    assert not (tmp_path / "f_curve.svg").exists()


def test_threshold_unbounded(tmp_path, capsys):
    assert main(["threshold", "--alpha", "1", "--out", str(tmp_path), "--no-svg"]) == 0
    assert "m_threshold = unbounded" in capsys.readouterr().out


ZERO = "[hypothesis]\ndim = 3\nalpha = 1\nlambda = 0.1\n[discretization]\nelements = 30\n"


def test_solve_zero_data(tmp_path):
    cfg = tmp_path / "zero.ini"
    cfg.write_text(ZERO)
    assert main(["solve", str(cfg), "--out", str(tmp_path / "o")]) == 0
    header, (r, u) = read_csv(tmp_path / "o" / "solution.csv")
    assert header == ["r", "u"] and r.size == 31
    assert np.all(u == 0.0)
    h, (it, gap) = read_csv(tmp_path / "o" / "residual_history_n10.csv")
    assert h == ["iter", "gap"]
    assert "verdict = converged" in (tmp_path / "o" / "solve_report.txt").read_text()


MP = """\
[hypothesis]
dim = 3
alpha = 1
A = 0.2
lambda = 0.1
[coefficients]
a = 2*r^-1 + 1
f = 2*r^-1 + 1
[discretization]
elements = 80
grading = 0.95
[solver]
schedule = 100, 1000
[tasks]
m_grid = 6, 9
scan_cutoffs = 1e-2, 1e-3, 1e-4
elements_per_decade = 15
workers = 2
"""


def test_maxprin(tmp_path, capsys):
    cfg = tmp_path / "mp.ini"
    cfg.write_text(MP)
    assert main(["maxprin", str(cfg), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "weak_ok = True" in out and "strong_ok = True" in out


def test_scan_config(tmp_path):
    cfg = tmp_path / "mp.ini"
    cfg.write_text(MP)
    assert main(["scan", "--config", str(cfg), "--out", str(tmp_path), "--no-svg"]) == 0
    header, cols = read_csv(tmp_path / "summability.csv")
    assert header[:2] == ["m", "level"] and "class" in header


def test_scan_rho(tmp_path, capsys):
    assert main(["scan", "--rho", "0.3333333333333333", "--out", str(tmp_path)]) == 0
    assert "empirical_threshold = 9" in capsys.readouterr().out
    assert (tmp_path / "summability.svg").exists()


def test_scan_requires_source(tmp_path):
    assert main(["scan", "--out", str(tmp_path)]) == 1


def test_spectral_commands(capsys):
    assert main(["hardy", "--elements", "200", "--grading", "0.95"]) == 0
    assert main(["eigen", "--elements", "200"]) == 0
    out = capsys.readouterr().out
    assert "hardy_minimum" in out and "dirichlet_eigenvalue = 9.869" in out


def test_verify_example(tmp_path, capsys):
    assert main(["verify-example", "--out", str(tmp_path), "--no-svg"]) == 0
    out = capsys.readouterr().out
    assert "exact (rho, C, a, f, Q, F) = 1/3, 4/9, 35/18, 5/6, 3/7, 25/18" in out
    assert (tmp_path / "example_summability.csv").exists()


def test_verify_example_rejects_m8(tmp_path):
    assert main(["verify-example", "--m", "8", "--out", str(tmp_path)]) == 2


def test_bad_config_status_1(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[hypothesis]\ndim = 3\nalpha = 1\nbogus = 1\n")
    assert main(["solve", str(cfg)]) == 1
    assert "line 4" in capsys.readouterr().err


def test_solve_existence_failure_status_2(tmp_path):
    cfg = tmp_path / "x.ini"
    cfg.write_text("[hypothesis]\ndim = 3\nalpha = 1\nlambda = 0.3\n")
    assert main(["solve", str(cfg), "--out", str(tmp_path)]) == 2


def test_missing_config_status_1(tmp_path):
    assert main(["solve", str(tmp_path / "nope.ini")]) == 1
