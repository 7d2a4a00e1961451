"""Reproducible experiment drivers: parameter sweeps, convergence traces,
initialization robustness, and the Monte Carlo / brute force validation runs.

Determinism contract: every random quantity is derived from the config's
master seed through named seed sequences, tasks are collected in a fixed
order, and all CSV floats are written with repr() so repeated runs with
the same config produce byte-identical CSV files.  Wall-clock runtime is
reported only in the JSON summary, never in a CSV.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry, se_model
from .configio import ConfigBundle
from .optimizer import ProblemSpec, optimize
from .oracle import MCConfig, brute_force_small, mc_validate_mr_terms, simulate_estimation

__all__ = [
    "build_problem",
    "run_single",
    "SweepResult",
    "run_sweep",
    "convergence_trace",
    "RobustnessReport",
    "robustness_study",
    "ETA_INIT_GRID",
    "validation_run",
    "oracle_comparison",
]

ETA_INIT_GRID = (0.01, 0.25, 0.5, 0.75, 1.0)


def layout_seed_for(master_seed: int, num_aps: int, num_ues: int, realization: int) -> int:
    """Derived per-layout seed.

    Keyed by network size and realization index only, so sweep points that
    differ in the QoS target or the transmit power reuse identical layouts
    and the corresponding curves are paired.
    """
    seq = np.random.SeedSequence([master_seed, num_aps, num_ues, realization])
    return int(seq.generate_state(1, np.uint64)[0])


def build_problem(bundle: ConfigBundle, layout_seed: int, **overrides):
    """Instantiate one random network and its optimization problem.

    Returns (ps, eta0, assoc0).  Recognized overrides: num_aps, num_ues,
    p_u_w, se_qos.  The fusion structure frozen into ps is built from the
    fully connected association; assoc0 is the configured starting scheme.
    """
    geo = bundle.geometry
    geo_kw = {"rng_seed": layout_seed}
    if "num_aps" in overrides:
        geo_kw["num_aps"] = int(overrides["num_aps"])
    if "num_ues" in overrides:
        geo_kw["num_ues"] = int(overrides["num_ues"])
    geo = dataclasses.replace(geo, **geo_kw)
    p_u = float(overrides.get("p_u_w", bundle.radio.p_u_w))
    se_qos = float(overrides.get("se_qos", bundle.experiment.se_qos))

    dep = geometry.place_network(geo)
    beta = geometry.compute_lsfc(dep, geo)
    pilots = geometry.assign_pilots(
        geo.num_ues, geo.pilot_len, bundle.experiment.pilot_scheme, seed=layout_seed
    )
    noise_w = se_model.thermal_noise_w(bundle.energy.bandwidth_hz, bundle.radio.noise_figure_db)
    gamma = se_model.estimation_quality(beta, pilots, bundle.radio.p_p_w, noise_w)
    full = np.ones_like(beta)
    grouping = se_model.classify_users(
        beta, full, pilots, bundle.radio.strong_fraction, geo.antennas_per_ap
    )
    weights = se_model.lsfd_weights(gamma, grouping, full, bundle.radio.lsfd_mode)
    ps = ProblemSpec(
        beta=beta,
        gamma=gamma,
        pilots=pilots,
        grouping=grouping,
        weights=weights,
        energy=bundle.energy,
        antennas_per_ap=geo.antennas_per_ap,
        p_u=p_u,
        p_p=bundle.radio.p_p_w,
        noise_w=noise_w,
        prelog=se_model.prelog_factor(geo.pilot_len, geo.coherence_len),
        se_qos=se_qos,
        strong_fraction=bundle.radio.strong_fraction,
        lsfd_mode=bundle.radio.lsfd_mode,
    )
    assoc0 = geometry.initial_association(
        beta, bundle.experiment.association_scheme, seed=layout_seed
    )
    eta0 = np.full(geo.num_ues, bundle.experiment.eta_init)
    return ps, eta0, assoc0


def run_single(bundle: ConfigBundle, layout_seed: int, **overrides):
    """Solve one realization; returns (Solution, SolveTrace)."""
    ps, eta0, assoc0 = build_problem(bundle, layout_seed, **overrides)
    return optimize(ps, eta0, assoc0, bundle.solver)


@dataclass(frozen=True)
class SweepResult:
    rows: list  # one tuple per (grid point, realization); last element is the run's wall time
    aggregate_rows: list  # one tuple per grid point
    runtime_seconds: float


_LONG_HEADER = (
    "se_qos,num_aps,num_ues,p_u_w,realization,layout_seed,"
    "ee_bits_per_joule,sum_se_bits_per_hz,iterations,status\n"
)
_AGG_HEADER = (
    "se_qos,num_aps,num_ues,p_u_w,realizations,"
    "mean_ee_bits_per_joule,mean_sum_se_bits_per_hz\n"
)


def _sweep_axes(bundle: ConfigBundle):
    exp = bundle.experiment
    qos_axis = exp.qos_grid if exp.qos_grid else (exp.se_qos,)
    m_axis = exp.num_aps_grid if exp.num_aps_grid else (bundle.geometry.num_aps,)
    t_axis = exp.num_ues_grid if exp.num_ues_grid else (bundle.geometry.num_ues,)
    if exp.p_u_grid_w:
        p_axis = exp.p_u_grid_w
    else:
        p_axis = (bundle.radio.p_u_w,)
    return qos_axis, m_axis, t_axis, p_axis


def _sweep_task(args):
    bundle, se_qos, m, t, p_u, realization = args
    seed = layout_seed_for(bundle.experiment.master_seed, m, t, realization)
    t0 = time.perf_counter()
    sol, _ = run_single(bundle, seed, se_qos=se_qos, num_aps=m, num_ues=t, p_u_w=p_u)
    elapsed = time.perf_counter() - t0
    return (
        se_qos,
        m,
        t,
        p_u,
        realization,
        seed,
        sol.ee,
        sol.sum_se,
        sol.iterations,
        sol.status,
        elapsed,
    )


def run_sweep(bundle: ConfigBundle, out_dir: str, workers: int = 1) -> SweepResult:
    """Grid sweep over QoS target, AP count, UE count, and transmit power.

    Grid axes come from the [experiment] section; an absent axis collapses
    to the base value, and every axis column is still present in the CSVs.
    Writes sweep_results.csv (one row per realization), sweep_aggregate.csv
    (means over realizations), and sweep_summary.json (runtime and counts).
    """
    t0 = time.perf_counter()
    qos_axis, m_axis, t_axis, p_axis = _sweep_axes(bundle)
    reals = range(bundle.experiment.realizations)
    tasks = [
        (bundle, q, m, t, p, r)
        for q in qos_axis
        for m in m_axis
        for t in t_axis
        for p in p_axis
        for r in reals
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_task, tasks, chunksize=1))
    else:
        rows = [_sweep_task(task) for task in tasks]

    agg_rows = []
    per_real = len(list(reals))
    for i in range(0, len(rows), per_real):
        block = rows[i : i + per_real]
        q, m, t, p = block[0][:4]
        ee_mean = float(np.mean([r[6] for r in block]))
        se_mean = float(np.mean([r[7] for r in block]))
        agg_rows.append((q, m, t, p, per_real, ee_mean, se_mean))
    runtime = time.perf_counter() - t0

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "sweep_results.csv"), "w", newline="") as fh:
        fh.write(_LONG_HEADER)
        for q, m, t, p, r, seed, ee, se, iters, status, _ in rows:
            fh.write(f"{q!r},{m},{t},{p!r},{r},{seed},{ee!r},{se!r},{iters},{status}\n")
    with open(os.path.join(out_dir, "sweep_aggregate.csv"), "w", newline="") as fh:
        fh.write(_AGG_HEADER)
        for q, m, t, p, n, ee, se in agg_rows:
            fh.write(f"{q!r},{m},{t},{p!r},{n},{ee!r},{se!r}\n")
    summary = {
        "runtime_seconds": runtime,
        "run_seconds": [row[10] for row in rows],
        "num_grid_points": len(agg_rows),
        "num_runs": len(rows),
        "realizations": per_real,
        "master_seed": bundle.experiment.master_seed,
        "workers": workers,
    }
    with open(os.path.join(out_dir, "sweep_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return SweepResult(rows=rows, aggregate_rows=agg_rows, runtime_seconds=runtime)


def convergence_trace(bundle: ConfigBundle, out_path: str | None = None, realization: int = 0):
    """Solve the base configuration once and optionally write the trace CSV."""
    seed = layout_seed_for(
        bundle.experiment.master_seed,
        bundle.geometry.num_aps,
        bundle.geometry.num_ues,
        realization,
    )
    sol, trace = run_single(bundle, seed)
    if out_path is not None:
        trace.to_csv(out_path)
    return sol, trace


@dataclass(frozen=True)
class RobustnessReport:
    rows: list  # (scheme, eta_init, ee, sum_se, iterations, status)
    ee_min: float
    ee_max: float

    @property
    def relative_spread(self) -> float:
        if self.ee_max <= 0:
            return 0.0
        return (self.ee_max - self.ee_min) / self.ee_max


def robustness_study(
    bundle: ConfigBundle, out_path: str | None = None, realization: int = 0
) -> RobustnessReport:
    """Final EE across association-scheme and power initializations.

    One fixed network realization is solved from every pairing of the
    named association schemes with a grid of uniform power starts; the
    report records the relative spread of the resulting EE values.
    """
    seed = layout_seed_for(
        bundle.experiment.master_seed,
        bundle.geometry.num_aps,
        bundle.geometry.num_ues,
        realization,
    )
    ps, _, _ = build_problem(bundle, seed)
    rows = []
    for scheme in geometry.ASSOCIATION_SCHEMES:
        assoc0 = geometry.initial_association(ps.beta, scheme, seed=seed)
        for eta_init in ETA_INIT_GRID:
            eta0 = np.full(ps.num_ues, eta_init)
            sol, _ = optimize(ps, eta0, assoc0, bundle.solver)
            rows.append((scheme, eta_init, sol.ee, sol.sum_se, sol.iterations, sol.status))
    ees = [row[2] for row in rows]
    report = RobustnessReport(rows=rows, ee_min=min(ees), ee_max=max(ees))
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            fh.write("association_scheme,eta_init,ee_bits_per_joule,sum_se_bits_per_hz,iterations,status\n")
            for scheme, eta_init, ee, se, iters, status in rows:
                fh.write(f"{scheme},{eta_init!r},{ee!r},{se!r},{iters},{status}\n")
    return report


def validation_run(bundle: ConfigBundle, trials: int = 100_000, seed: int = 0):
    """Monte Carlo check of the estimation quality and the fusion statistics.

    Uses the bundle's geometry with every UE on its own pilot (required by
    the term-level check), the fully connected association, and distinct
    per-UE power coefficients.  Returns (EstimationCheck, MrValidationReport).
    """
    geo = bundle.geometry
    if geo.num_ues > geo.pilot_len:
        raise ValueError("validation requires num_ues <= pilot_len (orthogonal pilots)")
    ps, _, _ = build_problem(bundle, layout_seed=seed)
    mc = MCConfig(trials=trials, rng_seed=seed)
    est = simulate_estimation(
        ps.beta[0], ps.pilots, ps.p_p, ps.noise_w, ps.antennas_per_ap, mc
    )
    eta = np.linspace(0.5, 1.0, ps.num_ues)
    pv = se_model.PowerVector(eta=eta, p_u=ps.p_u, p_p=ps.p_p)
    assoc = np.ones_like(ps.beta)
    weights = np.ones_like(ps.beta)
    report = mc_validate_mr_terms(
        ps.beta, ps.pilots, assoc, weights, pv, ps.noise_w, ps.antennas_per_ap, mc
    )
    return est, report


def oracle_comparison(bundle: ConfigBundle, eta_grid: int = 11, realization: int = 0):
    """Solver against the exhaustive oracle on a tiny instance.

    Returns a dict with both EE values and their ratio; raises ValueError
    when the configured network is too large to enumerate.
    """
    seed = layout_seed_for(
        bundle.experiment.master_seed,
        bundle.geometry.num_aps,
        bundle.geometry.num_ues,
        realization,
    )
    ps, eta0, assoc0 = build_problem(bundle, seed)
    sol, _ = optimize(ps, eta0, assoc0, bundle.solver)
    ref = brute_force_small(ps, eta_grid=eta_grid)
    ratio = sol.ee / ref.ee if ref.ee > 0 else (1.0 if sol.ee == 0 else float("inf"))
    return {
        "layout_seed": seed,
        "solver_ee": sol.ee,
        "oracle_ee": ref.ee,
        "ratio": ratio,
        "solver_status": sol.status,
        "oracle_feasible": ref.feasible,
        "evaluations": ref.evaluations,
    }
