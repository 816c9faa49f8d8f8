"""Command-line interface.

Subcommands:
    validate    build and grid-check the model, print the report
    simulate    one ensemble at --mu; trajectory CSV + summary row
    sweep       ensembles for every mu in the config; summary.csv
    limits      exit constants (r, K, D(r), D(-r)) as CSV on stdout
    limit-table limit-law CDF grid as CSV on stdout
    martingale  martingale diagnostics as JSON on stdout

Exit codes: 0 success, 1 configuration/model validation failure, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .exprlang import ParseError
from .flow import d_shift
from .harness import ConfigError, append_summary, build_config_model, load_config, run_single, run_sweep
from .limitlaw import limit_cdf, theta_limit_cdf
from .model import AssumptionError, describe
from .pdmp import martingale_probe


def _cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    model = build_config_model(config)
    print(describe(model))
    print("validation: OK")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    traj_path, row = run_single(config, args.mu)
    append_summary(config, row)
    print(f"wrote {traj_path}")
    print(
        f"mu={row.mu:g} n={row.n} frac_plus={row.frac_plus:.4f} "
        f"ks_tau_plus={row.ks_tau_plus} ks_tau_minus={row.ks_tau_minus} ks_theta={row.ks_theta}"
    )
    print(f"wall_seconds={row.wall_seconds:.2f}", file=sys.stderr)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    summary_path = run_sweep(config)
    print(f"wrote {summary_path}")
    return 0


def _cmd_limits(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    model = build_config_model(config)
    plus = d_shift(model, config.r, config.quad_tol)
    minus = d_shift(model, -config.r, config.quad_tol)
    print("r,K,D_plus,D_minus")
    print(f"{config.r!r},{plus.K!r},{plus.D!r},{minus.D!r}")
    return 0


def _cmd_limit_table(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    model = build_config_model(config)
    from .limitlaw import law_for_model

    law = law_for_model(model, config.r, config.quad_tol)
    print("t,cdf_plus,cdf_minus,theta_cdf")
    for t in np.linspace(args.tmin, args.tmax, args.steps):
        tf = float(t)
        print(
            f"{tf!r},{limit_cdf(law, +1, tf)!r},{limit_cdf(law, -1, tf)!r},"
            f"{theta_limit_cdf(law, tf)!r}"
        )
    return 0


def _cmd_martingale(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    model = build_config_model(config)
    report = martingale_probe(model, args.mu, args.T, config.n, config.master_seed)
    print(json.dumps(dataclasses.asdict(report), indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="switchexit",
        description="Simulate exits of a randomly switched flow from an unstable equilibrium "
        "and compare them with the limiting Gaussian exit law.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="build the model and print the validation report")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("simulate", help="run one ensemble at a given switching rate")
    p.add_argument("config")
    p.add_argument("--mu", type=float, required=True, help="switching rate")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run ensembles for every mu in the config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("limits", help="print the exit constants K and D as CSV")
    p.add_argument("config")
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("limit-table", help="print the limit-law CDFs on a t-grid as CSV")
    p.add_argument("config")
    p.add_argument("--tmin", type=float, default=-5.0)
    p.add_argument("--tmax", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=201)
    p.set_defaults(func=_cmd_limit_table)

    p = sub.add_parser("martingale", help="martingale diagnostics at a fixed horizon")
    p.add_argument("config")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.set_defaults(func=_cmd_martingale)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, AssumptionError, ParseError) as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 — CLI boundary
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
