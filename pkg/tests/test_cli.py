import json

import numpy as np
import pytest

from fretsim.cli import main, run_check_noise
from fretsim.config import resolve_config
from fretsim.output import format_sig


FAST = ["--realizations", "12", "--tau-max", "3"]


def run_cli(args):
    return main([str(a) for a in args])


def test_format_sig_nine_significant_digits():
    assert format_sig(0.65) == "0.650000000"
    assert format_sig(28.0) == "28.0000000"
    assert format_sig(0.01) == "0.0100000000"
    assert format_sig(0.2070957095709571) == "0.207095710"
    assert format_sig(0.0) == "0.00000000"
    assert format_sig(-0.0) == "0.00000000"
    assert format_sig(-3.5) == "-3.50000000"
    assert format_sig(123456789.123) == "123456789"
    assert format_sig(1e-4) == "0.000100000000"
    assert format_sig(float("nan")) == "nan"


def test_simulate_writes_the_documented_files(tmp_path):
    out = tmp_path / "run"
    assert run_cli(["simulate", *FAST, "--seed", 3, "--out", out]) == 0
    g2 = (out / "g2.csv").read_text().splitlines()
    assert g2[0] == "tau,g2_dd,g2_aa,g2_da,g2_ad"
    assert len(g2) == 1 + 301  # header + tau grid 0..3 step 0.01
    first = g2[1].split(",")
    assert first[0] == "0.00000000"
    assert first[1] == "0.00000000"  # donor antibunching row
    assert first[2] == "0.00000000"
    adiabatic = (out / "adiabatic.csv").read_text().splitlines()
    assert adiabatic[0] == "tau,g2_aa_adiabatic"
    assert len(adiabatic) == len(g2)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 3
    assert summary["config"]["realizations"] == 12
    assert {"mean_intensity", "mean_gamma5", "fits", "n_samples"} <= set(
        summary["results"])


def test_summary_echo_reproduces_the_resolved_config(tmp_path):
    out = tmp_path / "run"
    assert run_cli(["simulate", *FAST, "--seed", 11, "--out", out]) == 0
    summary = json.loads((out / "summary.json").read_text())
    cfg = resolve_config(summary["config"])
    assert cfg.as_dict() == summary["config"]


def test_same_seed_gives_byte_identical_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli(["simulate", *FAST, "--seed", 5, "--out", a])
    run_cli(["simulate", *FAST, "--seed", 5, "--out", b])
    assert (a / "g2.csv").read_bytes() == (b / "g2.csv").read_bytes()
    c = tmp_path / "c"
    run_cli(["simulate", *FAST, "--seed", 6, "--out", c])
    assert (a / "g2.csv").read_bytes() != (c / "g2.csv").read_bytes()


def test_worker_count_does_not_change_output(tmp_path):
    outputs = []
    for workers in (1, 2):
        out = tmp_path / f"w{workers}"
        run_cli(["simulate", "--realizations", "30", "--tau-max", "3",
                 "--seed", 5, "--workers", workers, "--out", out])
        outputs.append((out / "g2.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_emit_paths_dumps_one_csv_per_realization(tmp_path):
    out = tmp_path / "run"
    run_cli(["simulate", "--realizations", "3", "--tau-max", "2",
             "--seed", 1, "--out", out, "--emit-paths"])
    files = sorted((out / "paths").glob("path_*.csv"))
    assert [f.name for f in files] == ["path_0.csv", "path_1.csv", "path_2.csv"]
    lines = files[0].read_text().splitlines()
    assert lines[0] == "t,gamma5"
    assert lines[1].startswith("0.00000000,")


def test_literal_normalization_flag(tmp_path):
    out = tmp_path / "run"
    run_cli(["simulate", *FAST, "--seed", 2, "--out", out,
             "--literal-eq10-normalization"])
    rows = (out / "g2.csv").read_text().splitlines()
    first = rows[1].split(",")
    assert first[1] == "nan"  # autocorrelations lose their normalization
    assert first[3] == "1.00000000"  # cross pair normalized to its zero-delay value


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("gamma5_baseline = -1\n")
    assert run_cli(["simulate", "--config", bad]) == 2
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("warp_speed = 9\n")
    assert run_cli(["simulate", "--config", unknown]) == 2
    assert run_cli(["simulate", "--config", tmp_path / "missing.cfg"]) == 2


def test_numerical_failure_exit_code(tmp_path):
    cfg = tmp_path / "impossible.cfg"
    cfg.write_text(
        "diffusion = 1e12\n"
        "gamma5_min = 0.649\n"
        "gamma5_max = 0.651\n"
        "realizations = 2\n"
        "tau_max = 1\n")
    assert run_cli(["simulate", "--config", cfg, "--out", tmp_path / "o"]) == 3


def test_steady_state_table(capsys):
    assert run_cli(["steady-state", "--gamma5", "1.0"]) == 0
    out = capsys.readouterr().out
    assert "p00    0.420792079" in out
    assert "p01    0.207095710" in out
    assert "p10    0.255775578" in out
    assert "p11    0.116336634" in out
    assert "donor     0.372112211" in out
    assert "acceptor  0.323432343" in out


def test_steady_state_matches_adiabatic_anchor_at_high_rate(capsys):
    # acceptor intensity at the upper transfer bound vs the branching value
    assert run_cli(["steady-state", "--gamma5", "5.0"]) == 0
    out = capsys.readouterr().out
    value = float(next(line.split()[1] for line in out.splitlines()
                       if line.startswith("acceptor")))
    # the closed form overshoots at saturating excitation; see the kinetics
    # and adiabatic test modules for the quantitative statement
    assert value == pytest.approx(0.5138055222, abs=1e-6)


def test_adiabatic_subcommand(tmp_path, capsys):
    out = tmp_path / "ad"
    assert run_cli(["adiabatic", "--out", out, "--tau-max", "2"]) == 0
    printed = capsys.readouterr().out
    assert "I_high = 0.933333333" in printed
    assert "I_low = 0.100000000" in printed
    rows = (out / "adiabatic.csv").read_text().splitlines()
    assert rows[0] == "tau,g2_aa_adiabatic"
    assert rows[1] == "0.00000000," + format_sig(1.0 + 625.0 / 961.0)


def test_check_noise_report(capsys):
    cfg = resolve_config({"realizations": 300, "master_seed": 7})
    report = run_check_noise(cfg)
    assert report["n_steps"] == 10_000
    assert abs(report["anchors"]["0"]["estimated"] - 1.0) < 0.05
    assert abs(report["anchors"]["tau_c"]["estimated"] - 1.0 / np.e) < 0.1 / np.e
    assert abs(report["log_slope"] + 1.0 / 7.0) < 0.1 / 7.0
    assert report["bounded_min"] >= 0.0
    assert report["bounded_max"] <= 5.0
    assert 0.95 <= report["bounded_mean"] <= 1.15
    assert run_cli(["check-noise", "--realizations", "80", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "unbounded autocovariance" in out
    assert "bounded process" in out
