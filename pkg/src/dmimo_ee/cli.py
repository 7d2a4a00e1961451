"""Command line front end.

Subcommands: sweep, trace, robustness, validate, oracle.  Exit codes:
0 on success, 1 on configuration errors (bad file, unknown keys), 2 on
runtime failures (solver errors, failed validation).
"""

from __future__ import annotations

import argparse
import sys

from .configio import ConfigBundle, ConfigError, load_config
from . import experiments

__all__ = ["main", "cli_main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmimo-ee",
        description="Joint AP-UE association and uplink power control for energy efficiency.",
    )
    parser.add_argument("--config", help="path to an INI configuration file")
    parser.add_argument("--seed", type=int, help="override the master seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run the configured parameter sweep")
    p_sweep.add_argument(
        "--out", help="output directory for sweep CSV/JSON files (default: config output_dir)"
    )
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    p_trace = sub.add_parser("trace", help="solve one instance and write the iteration trace")
    p_trace.add_argument("--out", required=True, help="output CSV path for the trace")

    p_rob = sub.add_parser("robustness", help="sweep initializations on one fixed instance")
    p_rob.add_argument("--out", required=True, help="output CSV path for per-start results")

    p_val = sub.add_parser("validate", help="Monte Carlo check of the closed-form model")
    p_val.add_argument("--trials", type=int, default=100_000, help="Monte Carlo trials")
    p_val.add_argument(
        "--sigmas", type=float, default=4.0, help="largest tolerated |z| score"
    )

    p_orc = sub.add_parser("oracle", help="compare the solver with exhaustive search (tiny instances)")
    p_orc.add_argument("--eta-grid", type=int, default=11, help="points of the per-UE power grid")
    return parser


def _load(args) -> ConfigBundle:
    if args.config is None:
        bundle = ConfigBundle()
    else:
        bundle = load_config(args.config)
    if args.seed is not None:
        import dataclasses

        bundle = dataclasses.replace(
            bundle, experiment=dataclasses.replace(bundle.experiment, master_seed=args.seed)
        )
    return bundle


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; map usage errors to 1
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        bundle = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "sweep":
            out_dir = args.out if args.out else bundle.experiment.output_dir
            result = experiments.run_sweep(bundle, out_dir, workers=args.workers)
            print(
                f"sweep: {result.runtime_seconds:.2f} s, "
                f"{len(result.rows)} runs over {len(result.aggregate_rows)} grid points, "
                f"results in {out_dir}"
            )
        elif args.command == "trace":
            sol, trace = experiments.convergence_trace(bundle, args.out)
            print(
                f"trace: status={sol.status} iterations={sol.iterations} "
                f"ee={sol.ee:.6g} bit/J sum_se={sol.sum_se:.6g} bit/s/Hz -> {args.out}"
            )
        elif args.command == "robustness":
            report = experiments.robustness_study(bundle, args.out)
            print(
                f"robustness: {len(report.rows)} starts, "
                f"ee in [{report.ee_min:.6g}, {report.ee_max:.6g}] bit/J, "
                f"relative spread {report.relative_spread:.3%}"
            )
        elif args.command == "validate":
            seed = bundle.experiment.master_seed
            est, report = experiments.validation_run(bundle, trials=args.trials, seed=seed)
            worst_est = float(est.z_scores.max())
            print("term,ue,empirical,closed_form,stderr,z")
            for row in report.to_rows():
                print(",".join(str(x) for x in row))
            print(f"estimation quality: max |z| = {worst_est:.3f}")
            print(f"fusion statistics:  max |z| = {report.max_z:.3f}")
            if worst_est > args.sigmas or not report.passed(args.sigmas):
                print(f"validation FAILED at {args.sigmas} sigmas", file=sys.stderr)
                return 2
            print(f"validation passed at {args.sigmas} sigmas")
        elif args.command == "oracle":
            result = experiments.oracle_comparison(bundle, eta_grid=args.eta_grid)
            print(
                f"oracle: solver_ee={result['solver_ee']:.6g} "
                f"oracle_ee={result['oracle_ee']:.6g} ratio={result['ratio']:.4f} "
                f"({result['evaluations']} oracle evaluations)"
            )
        else:  # pragma: no cover - argparse enforces the choices
            return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
