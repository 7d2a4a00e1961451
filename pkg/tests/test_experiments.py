import dataclasses
import json

import numpy as np
import pytest

from dmimo_ee.configio import ConfigBundle, ConfigError, load_config
from dmimo_ee.experiments import (
    ETA_INIT_GRID,
    build_problem,
    convergence_trace,
    layout_seed_for,
    oracle_comparison,
    robustness_study,
    run_sweep,
    validation_run,
)

GOLDEN_INI = """
[geometry]
side_m = 400
num_aps = 3
num_ues = 2
antennas_per_ap = 4
coherence_len = 200
pilot_len = 5

[radio]
p_u_mw = 200
p_p_mw = 50
bandwidth_mhz = 10
noise_figure_db = 7
strong_fraction = 0.9
lsfd_mode = matched

[energy]
p_proc_w = 0.5
p_cpu_deco_mw_per_gbps = 100
lsfd_per_link = false

[solver]
eps = 0.01
max_iters = 30

[experiment]
master_seed = 7
realizations = 2
qos_grid = 0.0, 1.5
p_u_grid_mw = 50, 100
association_scheme = all
eta_init = 0.5
output_dir = out
"""


def write_ini(tmp_path, text=GOLDEN_INI, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def tiny_bundle(**experiment_kw):
    """In-memory bundle small enough for sub-second solves."""
    bundle = ConfigBundle()
    geo = dataclasses.replace(bundle.geometry, num_aps=3, num_ues=2, antennas_per_ap=4)
    exp = dataclasses.replace(bundle.experiment, realizations=2, **experiment_kw)
    return dataclasses.replace(bundle, geometry=geo, experiment=exp)


def test_load_config_applies_units_and_sections(tmp_path):
    bundle = load_config(write_ini(tmp_path))
    assert bundle.geometry.side_m == 400.0
    assert bundle.geometry.num_aps == 3
    assert bundle.radio.p_u_w == pytest.approx(0.2)
    assert bundle.radio.p_p_w == pytest.approx(0.05)
    assert bundle.radio.noise_figure_db == 7.0
    assert bundle.radio.lsfd_mode == "matched"
    assert bundle.energy.bandwidth_hz == pytest.approx(10e6)
    assert bundle.energy.p_proc_w == 0.5
    assert bundle.energy.p_cpu_decode_w_per_bps == pytest.approx(1e-10)
    assert bundle.energy.lsfd_per_link is False
    assert bundle.solver.eps == 0.01
    assert bundle.solver.max_iters == 30
    assert bundle.experiment.master_seed == 7
    assert bundle.experiment.qos_grid == (0.0, 1.5)
    assert bundle.experiment.p_u_grid_w == pytest.approx((0.05, 0.1))
    assert bundle.experiment.association_scheme == "all"
    assert bundle.experiment.eta_init == 0.5


def test_load_config_defaults_for_missing_sections(tmp_path):
    bundle = load_config(write_ini(tmp_path, "[geometry]\nnum_aps = 4\n"))
    assert bundle.geometry.num_aps == 4
    assert bundle.radio.p_u_w == 0.1
    assert bundle.energy.bandwidth_hz == 20e6
    assert bundle.solver.eps == 5e-3
    assert bundle.experiment.realizations == 50


def test_load_config_rejects_unknown_key(tmp_path):
    with pytest.raises(ConfigError, match="sidem"):
        load_config(write_ini(tmp_path, "[geometry]\nsidem = 3\n"))


def test_load_config_rejects_unknown_section(tmp_path):
    with pytest.raises(ConfigError, match="geom"):
        load_config(write_ini(tmp_path, "[geom]\nside_m = 3\n"))


def test_load_config_rejects_bad_value(tmp_path):
    with pytest.raises(ConfigError, match="num_aps"):
        load_config(write_ini(tmp_path, "[geometry]\nnum_aps = many\n"))


def test_load_config_rejects_invalid_setting(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_ini(tmp_path, "[experiment]\nrealizations = 0\n"))


def test_load_config_missing_file_names_path():
    with pytest.raises(ConfigError, match="no/such/file"):
        load_config("no/such/file.ini")


def test_layout_seed_pairing_and_sensitivity():
    base = layout_seed_for(0, 20, 10, 0)
    assert layout_seed_for(0, 20, 10, 0) == base
    assert layout_seed_for(0, 20, 10, 1) != base
    assert layout_seed_for(0, 21, 10, 0) != base
    assert layout_seed_for(0, 20, 11, 0) != base
    assert layout_seed_for(1, 20, 10, 0) != base


def test_build_problem_determinism_and_overrides():
    bundle = tiny_bundle()
    seed = layout_seed_for(0, 3, 2, 0)
    ps1, eta1, d1 = build_problem(bundle, seed)
    ps2, eta2, d2 = build_problem(bundle, seed)
    assert np.array_equal(ps1.beta, ps2.beta)
    assert np.array_equal(ps1.pilots.pilot_of, ps2.pilots.pilot_of)
    assert np.array_equal(d1, d2)
    assert np.array_equal(eta1, eta2)

    ps3, _, _ = build_problem(bundle, seed, num_aps=5, num_ues=3, p_u_w=0.25, se_qos=1.0)
    assert ps3.beta.shape == (5, 3)
    assert ps3.p_u == 0.25
    assert ps3.se_qos == 1.0


def _read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def test_run_sweep_outputs_and_aggregates(tmp_path):
    bundle = tiny_bundle(qos_grid=(0.0, 50.0))
    out = tmp_path / "sweep"
    result = run_sweep(bundle, str(out))
    assert len(result.rows) == 4
    assert len(result.aggregate_rows) == 2

    header, rows = _read_rows(out / "sweep_results.csv")
    assert header == (
        "se_qos,num_aps,num_ues,p_u_w,realization,layout_seed,"
        "ee_bits_per_joule,sum_se_bits_per_hz,iterations,status"
    )
    assert len(rows) == 4
    agg_header, agg = _read_rows(out / "sweep_aggregate.csv")
    assert agg_header == (
        "se_qos,num_aps,num_ues,p_u_w,realizations,"
        "mean_ee_bits_per_joule,mean_sum_se_bits_per_hz"
    )
    assert len(agg) == 2

    # aggregate means reproduce exactly from the long rows
    for k, block in enumerate((rows[:2], rows[2:])):
        ees = [float(r[6]) for r in block]
        assert float(agg[k][5]) == float(np.mean(ees))

    # unreachable QoS rows are flagged and carry zero EE
    for r in rows[2:]:
        assert r[9] == "infeasible"
        assert float(r[6]) == 0.0

    # identical layouts across the QoS axis: curves are paired per realization
    assert [r[5] for r in rows[:2]] == [r[5] for r in rows[2:]]

    summary = json.loads((out / "sweep_summary.json").read_text())
    assert summary["num_runs"] == 4
    assert summary["num_grid_points"] == 2
    assert summary["realizations"] == 2
    assert summary["master_seed"] == 0
    assert len(summary["run_seconds"]) == 4


def test_run_sweep_repeats_byte_identically(tmp_path):
    bundle = tiny_bundle(qos_grid=(0.0, 0.5))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_sweep(bundle, str(out1))
    run_sweep(bundle, str(out2))
    for name in ("sweep_results.csv", "sweep_aggregate.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    s1 = json.loads((out1 / "sweep_summary.json").read_text())
    s2 = json.loads((out2 / "sweep_summary.json").read_text())
    for volatile in ("runtime_seconds", "run_seconds"):
        s1.pop(volatile)
        s2.pop(volatile)
    assert s1 == s2


def test_run_sweep_parallel_matches_serial(tmp_path):
    bundle = tiny_bundle()
    out1, out2 = tmp_path / "serial", tmp_path / "parallel"
    run_sweep(bundle, str(out1), workers=1)
    run_sweep(bundle, str(out2), workers=2)
    assert (out1 / "sweep_results.csv").read_bytes() == (out2 / "sweep_results.csv").read_bytes()


def test_convergence_trace_csv_and_eps_ordering(tmp_path):
    bundle = tiny_bundle()
    path = tmp_path / "trace.csv"
    sol, trace = convergence_trace(bundle, str(path))
    assert sol.status in ("converged", "max_iters")
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,f,ee,sum_se,fractionality"
    f = [float(line.split(",")[1]) for line in lines[1:]]
    assert all(b >= a - 1e-9 * max(1.0, abs(a)) for a, b in zip(f, f[1:]))

    loose = dataclasses.replace(bundle, solver=dataclasses.replace(bundle.solver, eps=0.5))
    sol_loose, _ = convergence_trace(loose)
    assert sol_loose.iterations <= sol.iterations


def test_robustness_study_rows_and_csv(tmp_path):
    bundle = tiny_bundle()
    path = tmp_path / "rob.csv"
    report = robustness_study(bundle, str(path))
    assert len(report.rows) == 5 * len(ETA_INIT_GRID)
    statuses = {row[5] for row in report.rows}
    assert len(statuses) == 1
    assert report.relative_spread >= 0.0
    assert report.ee_max >= report.ee_min > 0.0
    lines = path.read_text().splitlines()
    assert lines[0] == "association_scheme,eta_init,ee_bits_per_joule,sum_se_bits_per_hz,iterations,status"
    assert len(lines) == 1 + len(report.rows)


def test_validation_run_checks_both_models():
    bundle = tiny_bundle()
    geo = dataclasses.replace(bundle.geometry, num_aps=2, num_ues=2)
    bundle = dataclasses.replace(bundle, geometry=geo)
    est, report = validation_run(bundle, trials=30_000, seed=0)
    assert np.all(est.z_scores < 4.0)
    assert report.passed(4.0)


def test_validation_run_requires_orthogonal_pilots():
    bundle = tiny_bundle()
    geo = dataclasses.replace(bundle.geometry, num_ues=6, pilot_len=5)
    bundle = dataclasses.replace(bundle, geometry=geo)
    with pytest.raises(ValueError):
        validation_run(bundle, trials=100)


def test_oracle_comparison_reports_near_optimal_ratio():
    result = oracle_comparison(tiny_bundle(), eta_grid=11)
    assert result["oracle_feasible"]
    assert result["solver_status"] in ("converged", "max_iters")
    assert result["ratio"] >= 0.98
    assert result["evaluations"] > 0
