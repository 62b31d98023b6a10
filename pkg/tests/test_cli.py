from pathlib import Path

import numpy as np

from nqglab.cli import main
from nqglab.lattice import load_wavefunction

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run_cli(*argv):
    return main(list(argv))


def test_run_zero_mass_scenario(tmp_path, capsys):
    code = run_cli(
        "run", "--config", str(SCENARIOS / "limit_zero_mass.ini"), "--out", str(tmp_path)
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "rho_trans = 0.000000" in out
    psi = load_wavefunction(tmp_path / "psi_l.nqgw")
    assert psi.grid.n == 1024
    assert (tmp_path / "psi_l_slice.csv").exists()
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "summary.txt").read_text() == out


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    config = str(SCENARIOS / "limit_zero_time.ini")
    assert run_cli("run", "--config", config, "--out", str(a)) == 0
    assert run_cli("run", "--config", config, "--out", str(b)) == 0
    for name in ("psi_l.nqgw", "psi_r.nqgw", "psi_l_slice.csv", "psi_r_slice.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sweep_csv_is_identical_across_thread_counts(tmp_path):
    config = str(SCENARIOS / "sweep_mass.ini")
    one, two = tmp_path / "t1", tmp_path / "t2"
    assert run_cli(
        "sweep", "--config", config, "--param", "M", "--values", "0,10,50",
        "--out", str(one), "--threads", "1",
    ) == 0
    assert run_cli(
        "sweep", "--config", config, "--param", "M", "--values", "0,10,50",
        "--out", str(two), "--threads", "3",
    ) == 0
    assert (one / "sweep.csv").read_bytes() == (two / "sweep.csv").read_bytes()
    header = (one / "sweep.csv").read_text().split("\n")[0]
    assert header == "param,value,rho_trans,overlap_re,overlap_im"


def test_threads_fallback_env_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("NQG_THREADS", "2")
    config = str(SCENARIOS / "sweep_mass.ini")
    assert run_cli(
        "sweep", "--config", config, "--param", "M", "--values", "0,10",
        "--out", str(tmp_path),
    ) == 0


def test_covariance_common_mode(tmp_path, capsys):
    code = run_cli(
        "covariance",
        "--config", str(SCENARIOS / "covariance_common.ini"),
        "--out", str(tmp_path),
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "deviation" in out
    rows = (tmp_path / "covariance.csv").read_text().strip().split("\n")
    assert rows[0].startswith("mode,")
    deviation = float(rows[1].split(",")[-1])
    assert deviation < 1e-6


def test_covariance_independent_mode_flags_the_witness(tmp_path, capsys):
    code = run_cli(
        "covariance",
        "--config", str(SCENARIOS / "covariance_witness.ini"),
        "--independent",
        "--out", str(tmp_path),
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "q-covariance violation witness" in out
    assert "rho_trans_tilde" in out
    line = [l for l in out.split("\n") if "rho_trans_tilde" in l][0]
    assert abs(float(line.split("=")[1]) - 0.5) <= 1e-9


def test_gauge_subcommand_writes_table(tmp_path, capsys):
    code = run_cli(
        "gauge", "--config", str(SCENARIOS / "gauge_witness.ini"), "--out", str(tmp_path)
    )
    assert code == 0
    rows = (tmp_path / "gauge.csv").read_text().strip().split("\n")
    assert rows[0] == "prescription_id,rho_trans"
    table = {r.split(",")[0]: float(r.split(",")[1]) for r in rows[1:]}
    assert set(table) == {"identity", "common", "relative"}
    assert abs(table["identity"] - table["common"]) <= 1e-6
    assert abs(table["identity"] - table["relative"]) >= 1e-2


def test_residual_subcommand(tmp_path, capsys):
    code = run_cli(
        "residual",
        "--config", str(SCENARIOS / "residual_schwarzschild.ini"),
        "--out", str(tmp_path),
    )
    assert code == 0
    rows = (tmp_path / "residual.csv").read_text().strip().split("\n")
    assert rows[0] == "t,x,y,z,r0,r1,r2,r3"
    assert len(rows) == 4
    residuals = np.array([[float(v) for v in r.split(",")[4:]] for r in rows[1:]])
    assert np.max(np.abs(residuals)) < 1e-6


def test_validation_failure_exits_one(tmp_path, capsys):
    bad = tmp_path / "degenerate.ini"
    bad.write_text(
        (SCENARIOS / "regression_1d.ini").read_text().replace("x_r = 2.0", "x_r = -2.0")
    )
    code = run_cli("run", "--config", str(bad), "--out", str(tmp_path / "out"))
    assert code == 1
    assert "degenerate" in capsys.readouterr().err


def test_unreadable_config_exits_one(tmp_path, capsys):
    code = run_cli("run", "--config", str(tmp_path / "missing.ini"))
    assert code == 1


def test_numerical_failure_exits_two(tmp_path, capsys):
    # a valid scenario whose deformation sits just under the invertibility
    # bound: the inverse-map iteration budget is exhausted at run time
    text = (SCENARIOS / "covariance_common.ini").read_text()
    text = text.replace("amplitude = 1.2", "amplitude = 2.46")  # kappa ~ 0.89
    hard = tmp_path / "hard.ini"
    hard.write_text(text)
    code = run_cli("covariance", "--config", str(hard), "--out", str(tmp_path / "out"))
    assert code == 2
    assert "numerical error" in capsys.readouterr().err


def test_usage_errors_do_not_crash(capsys):
    assert run_cli("sweep", "--config", "x.ini", "--param", "M", "--values", "") == 1
    assert run_cli("run") == 1  # missing --config maps to the validation code
    assert run_cli("--help") == 0
    assert "usage" in capsys.readouterr().out


def test_two_dimensional_scenario_runs(tmp_path, capsys):
    code = run_cli(
        "run", "--config", str(SCENARIOS / "double_slit_2d.ini"), "--out", str(tmp_path)
    )
    assert code == 0
    out = capsys.readouterr().out
    rho = float([l for l in out.split("\n") if l.startswith("rho_trans")][0].split("=")[1])
    assert 0.0 < rho < 1.0
