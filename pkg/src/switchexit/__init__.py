"""Exit statistics of randomly switched one-dimensional flows.

The state follows one of two vector fields f₊, f₋, switching between them at
the events of a rate-μ Poisson clock, started at the unstable equilibrium of
the averaged drift F = (f₊ + f₋)/2.  This package simulates the exit from
[−r, r] exactly (event-driven, reproducible across worker counts) and
provides the closed-form limiting law of the exit side and centered exit
time — exit side = sgn N and exit time = (1/2a)·log μ − (1/a)·log|N| + D(r·sgn N)
for a standard Gaussian N — together with the statistical machinery to
compare the two.
"""

from .exprlang import differentiate, evaluate, parse, serialize
from .flow import ExitConstants, FlowResult, d_shift, flow_map, hit_time, k_constant
from .harness import ExperimentConfig, SweepSummaryRow, load_config, run_single, run_sweep
from .limitlaw import LimitLaw, law_for_model, limit_cdf, normal_cdf, sample_limit, theta_limit_cdf
from .model import ModelPair, build_model, drift_F, gap_G
from .pdmp import (
    Ensemble,
    MartingaleReport,
    PathRecord,
    martingale_probe,
    run_ensemble,
    simulate_path,
)
from .stats import EmpiricalCdf, binomial_interval, ecdf, ks_statistic

__version__ = "0.1.0"

__all__ = [
    "parse",
    "evaluate",
    "differentiate",
    "serialize",
    "ModelPair",
    "build_model",
    "drift_F",
    "gap_G",
    "FlowResult",
    "ExitConstants",
    "flow_map",
    "hit_time",
    "k_constant",
    "d_shift",
    "PathRecord",
    "Ensemble",
    "MartingaleReport",
    "simulate_path",
    "run_ensemble",
    "martingale_probe",
    "LimitLaw",
    "normal_cdf",
    "limit_cdf",
    "theta_limit_cdf",
    "sample_limit",
    "law_for_model",
    "EmpiricalCdf",
    "ecdf",
    "ks_statistic",
    "binomial_interval",
    "ExperimentConfig",
    "SweepSummaryRow",
    "load_config",
    "run_single",
    "run_sweep",
    "__version__",
]
