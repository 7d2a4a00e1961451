import subprocess
import sys

import pytest

from dmimo_ee.cli import cli_main

TINY_INI = """
[geometry]
num_aps = 3
num_ues = 2
antennas_per_ap = 4

[experiment]
realizations = 2
output_dir = {out}
"""


@pytest.fixture
def tiny_cfg(tmp_path):
    path = tmp_path / "tiny.ini"
    path.write_text(TINY_INI.format(out=tmp_path / "results"))
    return str(path)


def test_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    assert cli_main(["sweep", "--help"]) == 0
    capsys.readouterr()


def test_usage_errors_exit_one(capsys):
    assert cli_main([]) == 1
    assert cli_main(["sweep", "--bogus"]) == 1
    capsys.readouterr()


def test_missing_config_exits_one_and_names_path(tmp_path, capsys):
    missing = str(tmp_path / "absent.ini")
    code = cli_main(["--config", missing, "trace", "--out", str(tmp_path / "t.csv")])
    assert code == 1
    err = capsys.readouterr().err
    assert "config error" in err
    assert "absent.ini" in err


def test_sweep_happy_path(tiny_cfg, tmp_path, capsys):
    out = tmp_path / "sweep_out"
    code = cli_main(["--config", tiny_cfg, "sweep", "--out", str(out)])
    assert code == 0
    assert (out / "sweep_results.csv").exists()
    assert (out / "sweep_aggregate.csv").exists()
    assert (out / "sweep_summary.json").exists()
    assert "sweep:" in capsys.readouterr().out


def test_sweep_uses_config_output_dir(tiny_cfg, tmp_path, capsys):
    code = cli_main(["--config", tiny_cfg, "sweep"])
    assert code == 0
    assert (tmp_path / "results" / "sweep_results.csv").exists()
    capsys.readouterr()


def test_trace_writes_csv(tiny_cfg, tmp_path, capsys):
    out = tmp_path / "trace.csv"
    assert cli_main(["--config", tiny_cfg, "trace", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "iteration,f,ee,sum_se,fractionality"
    assert len(lines) >= 2
    assert "trace:" in capsys.readouterr().out


def test_trace_seed_override_changes_instance(tiny_cfg, tmp_path, capsys):
    out1, out2, out3 = (tmp_path / f"t{i}.csv" for i in range(3))
    assert cli_main(["--config", tiny_cfg, "--seed", "1", "trace", "--out", str(out1)]) == 0
    assert cli_main(["--config", tiny_cfg, "--seed", "1", "trace", "--out", str(out2)]) == 0
    assert cli_main(["--config", tiny_cfg, "--seed", "2", "trace", "--out", str(out3)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_bytes() != out3.read_bytes()
    capsys.readouterr()


def test_robustness_writes_csv(tiny_cfg, tmp_path, capsys):
    out = tmp_path / "rob.csv"
    assert cli_main(["--config", tiny_cfg, "robustness", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 25
    assert "robustness:" in capsys.readouterr().out


def test_validate_passes_and_fails_by_threshold(tiny_cfg, capsys):
    assert cli_main(["--config", tiny_cfg, "validate", "--trials", "20000"]) == 0
    out = capsys.readouterr().out
    assert "term,ue,empirical,closed_form,stderr,z" in out
    assert "validation passed" in out
    assert cli_main(["--config", tiny_cfg, "validate", "--trials", "20000", "--sigmas", "0.001"]) == 2
    capsys.readouterr()


def test_oracle_subcommand(tiny_cfg, capsys):
    assert cli_main(["--config", tiny_cfg, "oracle", "--eta-grid", "5"]) == 0
    assert "ratio=" in capsys.readouterr().out


def test_module_and_console_entry_points(tiny_cfg):
    proc = subprocess.run(
        [sys.executable, "-m", "dmimo_ee.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "sweep" in proc.stdout
    script = subprocess.run(["dmimo-ee", "--help"], capture_output=True, text=True)
    assert script.returncode == 0
