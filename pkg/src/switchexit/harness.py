"""Experiment orchestration: JSON configs, single runs, μ-sweeps, CSV output.

A config describes one model and one Monte Carlo campaign.  ``run_single``
simulates an ensemble at one μ, writes a per-trajectory CSV, and condenses
it to a summary row (exit-side frequency, per-side KS distance of the
centered exit time against the limit CDF, KS of the centered θ).
``run_sweep`` repeats that over mu_list and writes ``summary.csv``.

Reproducibility: all CSV numbers are shortest round-trip decimals, and the
summary carries the SHA-256 of the physics-relevant config fields (worker
count and output directory are excluded — they cannot affect the numbers).
Timings are reported on stderr, never stored in the files, so re-running a
config reproduces every output byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

from .flow import d_shift
from .limitlaw import LimitLaw, limit_cdf, theta_limit_cdf
from .model import ModelPair, build_model
from .pdmp import SIGMA0_LAWS, Ensemble, run_ensemble
from .stats import ecdf, ks_statistic

__all__ = [
    "ExperimentConfig",
    "SweepSummaryRow",
    "ConfigError",
    "load_config",
    "build_config_model",
    "run_single",
    "run_sweep",
    "config_hash",
    "SUMMARY_COLUMNS",
]

SUMMARY_COLUMNS = ("mu", "n", "frac_plus", "ks_tau_plus", "ks_tau_minus", "ks_theta", "mean_switches")
TRAJ_COLUMNS = ("traj_index", "side", "tau", "centered_tau", "theta", "centered_theta", "n_switches")

_REQUIRED = ("f_plus", "f_minus", "R", "r", "mu_list", "n", "master_seed")
_OPTIONAL = ("gamma", "workers", "sigma0_law", "ode_tol", "quad_tol", "output_dir")


class ConfigError(Exception):
    """Invalid experiment configuration; names the offending field."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"config field {field!r}: {reason}")
        self.field = field
        self.reason = reason


@dataclass(frozen=True)
class ExperimentConfig:
    f_plus: str
    f_minus: str
    R: float
    r: float
    gamma: float
    mu_list: tuple[float, ...]
    n: int
    master_seed: int
    workers: int
    sigma0_law: str
    ode_tol: float
    quad_tol: float
    output_dir: str


@dataclass(frozen=True)
class SweepSummaryRow:
    mu: float
    n: int
    frac_plus: float
    ks_tau_plus: float | None
    ks_tau_minus: float | None
    ks_theta: float | None
    mean_switches: float
    wall_seconds: float


def _need_number(raw: dict, key: str) -> float:
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    return float(v)


def _need_int(raw: dict, key: str) -> int:
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    return v


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON config; unknown keys are rejected.

    The ``PDMP_WORKERS`` environment variable, when set, overrides the
    config's worker count.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<file>", "top level must be a JSON object")

    known = set(_REQUIRED) | set(_OPTIONAL)
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown config key")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(key, "missing required key")

    for key in ("f_plus", "f_minus"):
        if not isinstance(raw[key], str) or not raw[key].strip():
            raise ConfigError(key, "expected a non-empty expression string")

    R = _need_number(raw, "R")
    if not R > 0:
        raise ConfigError("R", f"must be positive, got {R}")
    r = _need_number(raw, "r")
    if not 0 < r <= R:
        raise ConfigError("r", f"need 0 < r <= R={R}, got {r}")

    gamma = _need_number(raw, "gamma") if "gamma" in raw else 0.375
    if not 0.25 < gamma < 0.5:
        raise ConfigError("gamma", f"gamma outside (1/4,1/2): {gamma}")

    mu_raw = raw["mu_list"]
    if not isinstance(mu_raw, list) or not mu_raw:
        raise ConfigError("mu_list", "expected a non-empty list of switching rates")
    mu_list: list[float] = []
    for v in mu_raw:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError("mu_list", f"entries must be positive numbers, got {v!r}")
        mu_list.append(float(v))
    for lo, hi in zip(mu_list, mu_list[1:]):
        if hi == lo:
            raise ConfigError("mu_list", f"duplicate value {lo}")
        if hi < lo:
            raise ConfigError("mu_list", "must be sorted ascending")

    n = _need_int(raw, "n")
    if n < 1:
        raise ConfigError("n", f"must be >= 1, got {n}")

    seed = _need_int(raw, "master_seed")
    if not 0 <= seed < 2**64:
        raise ConfigError("master_seed", f"must be a 64-bit unsigned integer, got {seed}")

    workers = _need_int(raw, "workers") if "workers" in raw else (os.cpu_count() or 1)
    env_workers = os.environ.get("PDMP_WORKERS")
    if env_workers is not None:
        try:
            workers = int(env_workers)
        except ValueError:
            raise ConfigError("workers", f"PDMP_WORKERS is not an integer: {env_workers!r}") from None
    if workers < 1:
        raise ConfigError("workers", f"must be >= 1, got {workers}")

    sigma0_law = raw.get("sigma0_law", "uniform")
    if sigma0_law not in SIGMA0_LAWS:
        raise ConfigError("sigma0_law", f"must be one of {SIGMA0_LAWS}, got {sigma0_law!r}")

    ode_tol = _need_number(raw, "ode_tol") if "ode_tol" in raw else 1e-10
    quad_tol = _need_number(raw, "quad_tol") if "quad_tol" in raw else 1e-10
    if not ode_tol > 0:
        raise ConfigError("ode_tol", f"must be positive, got {ode_tol}")
    if not quad_tol > 0:
        raise ConfigError("quad_tol", f"must be positive, got {quad_tol}")

    output_dir = raw.get("output_dir", ".")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir", f"expected a path string, got {output_dir!r}")

    return ExperimentConfig(
        f_plus=raw["f_plus"],
        f_minus=raw["f_minus"],
        R=R,
        r=r,
        gamma=gamma,
        mu_list=tuple(mu_list),
        n=n,
        master_seed=seed,
        workers=workers,
        sigma0_law=sigma0_law,
        ode_tol=ode_tol,
        quad_tol=quad_tol,
        output_dir=output_dir,
    )


def build_config_model(config: ExperimentConfig) -> ModelPair:
    return build_model(config.f_plus, config.f_minus, config.R)


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 over the fields that determine the numbers (not workers/paths)."""
    physics = {
        "f_plus": config.f_plus,
        "f_minus": config.f_minus,
        "R": config.R,
        "r": config.r,
        "gamma": config.gamma,
        "mu_list": list(config.mu_list),
        "n": config.n,
        "master_seed": config.master_seed,
        "sigma0_law": config.sigma0_law,
        "ode_tol": config.ode_tol,
        "quad_tol": config.quad_tol,
    }
    canon = json.dumps(physics, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _fmt(v: float | int | None) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return str(float(v))  # shortest round-trip decimal


def _law_for(model: ModelPair, r: float, quad_tol: float) -> LimitLaw:
    return LimitLaw(
        a=model.a,
        f0=model.f0,
        r=r,
        D_plus=d_shift(model, r, quad_tol).D,
        D_minus=d_shift(model, -r, quad_tol).D,
    )


def _summarize(ens: Ensemble, law: LimitLaw, wall_seconds: float) -> SweepSummaryRow:
    recs = ens.records
    n = len(recs)
    plus = [rec.centered_tau for rec in recs if rec.side > 0]
    minus = [rec.centered_tau for rec in recs if rec.side < 0]
    thetas = [rec.centered_theta for rec in recs if rec.centered_theta is not None]
    ks_plus = ks_statistic(ecdf(plus), lambda t: limit_cdf(law, +1, t)) if plus else None
    ks_minus = ks_statistic(ecdf(minus), lambda t: limit_cdf(law, -1, t)) if minus else None
    ks_theta = ks_statistic(ecdf(thetas), lambda t: theta_limit_cdf(law, t)) if thetas else None
    return SweepSummaryRow(
        mu=ens.mu,
        n=n,
        frac_plus=len(plus) / n,
        ks_tau_plus=ks_plus,
        ks_tau_minus=ks_minus,
        ks_theta=ks_theta,
        mean_switches=math.fsum(rec.n_switches for rec in recs) / n,
        wall_seconds=wall_seconds,
    )


def _write_traj_csv(path: Path, ens: Ensemble) -> None:
    lines = [",".join(TRAJ_COLUMNS)]
    for rec in ens.records:
        lines.append(
            ",".join(
                (
                    str(rec.traj_index),
                    str(rec.side),
                    _fmt(rec.tau),
                    _fmt(rec.centered_tau),
                    _fmt(rec.theta),
                    _fmt(rec.centered_theta),
                    str(rec.n_switches),
                )
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _summary_header(config: ExperimentConfig) -> list[str]:
    return [
        f"# config_hash={config_hash(config)}",
        f"# master_seed={config.master_seed}",
        ",".join(SUMMARY_COLUMNS),
    ]


def summary_line(row: SweepSummaryRow) -> str:
    return ",".join(
        (
            _fmt(row.mu),
            str(row.n),
            _fmt(row.frac_plus),
            _fmt(row.ks_tau_plus),
            _fmt(row.ks_tau_minus),
            _fmt(row.ks_theta),
            _fmt(row.mean_switches),
        )
    )


def run_single(
    config: ExperimentConfig, mu: float, model: ModelPair | None = None
) -> tuple[Path, SweepSummaryRow]:
    """Simulate one ensemble at rate mu; write its trajectory CSV.

    Returns the CSV path and the summary row.  The row's wall_seconds is
    informational only and never written to disk.
    """
    if model is None:
        model = build_config_model(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    ens = run_ensemble(
        model,
        mu,
        config.r,
        config.gamma,
        config.n,
        config.master_seed,
        config.workers,
        sigma0_law=config.sigma0_law,
        ode_tol=config.ode_tol,
    )
    wall = time.perf_counter() - t0

    law = _law_for(model, config.r, config.quad_tol)
    row = _summarize(ens, law, wall)
    traj_path = out / f"traj_mu{mu:g}.csv"
    _write_traj_csv(traj_path, ens)
    return traj_path, row


def run_sweep(config: ExperimentConfig) -> Path:
    """Run every μ in mu_list and write summary.csv (plus trajectory CSVs)."""
    model = build_config_model(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = _summary_header(config)
    for mu in config.mu_list:
        _path, row = run_single(config, mu, model=model)
        lines.append(summary_line(row))
    summary_path = out / "summary.csv"
    summary_path.write_text("\n".join(lines) + "\n")
    return summary_path


def append_summary(config: ExperimentConfig, row: SweepSummaryRow) -> Path:
    """Append one row to summary.csv, creating it (with provenance) if absent."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary_path = out / "summary.csv"
    if not summary_path.exists():
        summary_path.write_text("\n".join(_summary_header(config)) + "\n")
    with summary_path.open("a") as fh:
        fh.write(summary_line(row) + "\n")
    return summary_path
