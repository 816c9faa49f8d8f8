"""Event-driven simulation of the randomly switched flow.

The state (σ_t, x_t) holds a two-state Markov sign σ flipping at rate μ and
a position x following ẋ = f_σ(x) between flips, started at x = 0.  Each
trajectory records

* τ — first time |x| reaches the exit level r, located to 1e-9,
* the exit side sgn x_τ,
* θ — first time |x| reaches μ^{−γ} (recorded only when μ^{−γ} < r),
* the number of σ-flips before exit,

plus the centered versions τ − (1/2a)·log μ and θ − ((1/2−γ)/a)·log μ that
the limit laws are stated for.

Reproducibility contract: trajectory i draws from
Generator(Philox(SeedSequence(entropy=master_seed, spawn_key=(i,)))); the
initial sign consumes one uniform (uniform law only), then the kernel draws
one Exp(μ) holding time per event from the same stream.  Ensembles are
therefore byte-identical for any worker count or chunking.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .exprlang import evaluate, serialize
from .model import ModelPair

__all__ = [
    "PathRecord",
    "Ensemble",
    "ModelDescriptor",
    "MartingaleReport",
    "EventCapError",
    "PathExitedDomainError",
    "simulate_path",
    "run_ensemble",
    "martingale_probe",
    "EVENT_CAP",
    "SIGMA0_LAWS",
]

EVENT_CAP = 10**9
SIGMA0_LAWS = ("plus", "minus", "uniform")


class EventCapError(RuntimeError):
    """A path exceeded the per-path switch-event cap (misconfigured model?)."""


class PathExitedDomainError(RuntimeError):
    """A martingale-probe path left [−R, R] before the horizon T."""


@dataclass(frozen=True)
class PathRecord:
    tau: float
    side: int
    theta: float | None
    n_switches: int
    traj_index: int
    centered_tau: float
    centered_theta: float | None


@dataclass(frozen=True)
class ModelDescriptor:
    f_plus: str
    f_minus: str
    R: float


@dataclass(frozen=True)
class Ensemble:
    records: tuple[PathRecord, ...]
    model: ModelDescriptor
    mu: float
    r: float
    gamma: float
    master_seed: int
    n: int


@dataclass(frozen=True)
class MartingaleReport:
    T: float
    n: int
    mean_Z_T: float
    se_Z_T: float
    mean_qv: float      # sample mean of [Z]_T = 4·B(T)
    expected_qv: float  # 4μT


class _Compiled:
    """Opcode programs for both fields plus the substep cap, cached per model."""

    def __init__(self, model: ModelPair):
        self.code_p, self.consts_p, d_p = _kernels.compile_expr(model.f_plus)
        self.code_m, self.consts_m, d_m = _kernels.compile_expr(model.f_minus)
        self.stack_depth = max(d_p, d_m, 4)
        xs = np.linspace(-model.R, model.R, 2049)
        fmax = 0.0
        for x in xs:
            fmax = max(fmax, abs(evaluate(model.f_plus, float(x))), abs(evaluate(model.f_minus, float(x))))
        self.fmax = fmax
        self.h_cap = 1e-3 / max(1.0, fmax)

    def new_stack(self) -> np.ndarray:
        return np.empty(self.stack_depth, dtype=np.float64)


@lru_cache(maxsize=16)
def _compiled(model: ModelPair) -> _Compiled:
    return _Compiled(model)


def _substream(master_seed: int, traj_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(traj_index,))
    return np.random.Generator(np.random.Philox(ss))


def _draw_sigma0(law: str, rng: np.random.Generator) -> int:
    if law == "plus":
        return 1
    if law == "minus":
        return -1
    if law == "uniform":
        return 1 if rng.random() < 0.5 else -1
    raise ValueError(f"sigma0_law must be one of {SIGMA0_LAWS}, got {law!r}")


def _check_exit_args(model: ModelPair, mu: float, r: float, gamma: float) -> None:
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    if not 0 < r <= model.R:
        raise ValueError(f"need 0 < r <= R={model.R}, got r={r!r}")
    if not 0.25 < gamma < 0.5:
        raise ValueError(f"gamma must lie in (1/4, 1/2), got {gamma!r}")


def _theta_threshold(mu: float, r: float, gamma: float, warn: bool) -> float:
    thr = mu ** (-gamma)
    if thr < r:
        return thr
    if warn:
        warnings.warn(
            f"mu^-gamma = {thr:.4g} >= r = {r}: intermediate time theta not recorded "
            "(increase mu for the fast-switching regime)",
            stacklevel=3,
        )
    return -1.0


def _run_one(
    comp: _Compiled,
    stack: np.ndarray,
    model: ModelPair,
    mu: float,
    r: float,
    gamma: float,
    theta_thr: float,
    sigma0_law: str,
    ode_tol: float,
    master_seed: int,
    traj_index: int,
) -> PathRecord:
    rng = _substream(master_seed, traj_index)
    sigma0 = _draw_sigma0(sigma0_law, rng)
    status, tau, side, theta, n_switches = _kernels.exit_kernel(
        comp.code_p,
        comp.consts_p,
        comp.code_m,
        comp.consts_m,
        stack,
        mu,
        r,
        theta_thr,
        sigma0,
        ode_tol,
        comp.h_cap,
        EVENT_CAP,
        rng,
    )
    if status == _kernels.STATUS_CAP:
        raise EventCapError(f"trajectory {traj_index} exceeded {EVENT_CAP} switch events")
    if status != _kernels.STATUS_OK:
        raise RuntimeError(f"trajectory {traj_index} hit a non-finite state")
    a = model.a
    has_theta = theta >= 0.0
    return PathRecord(
        tau=tau,
        side=int(side),
        theta=theta if has_theta else None,
        n_switches=int(n_switches),
        traj_index=traj_index,
        centered_tau=tau - math.log(mu) / (2.0 * a),
        centered_theta=(theta - (0.5 - gamma) / a * math.log(mu)) if has_theta else None,
    )


def simulate_path(
    model: ModelPair,
    mu: float,
    r: float,
    gamma: float,
    stream: np.random.Generator,
    *,
    sigma0_law: str = "uniform",
    ode_tol: float = 1e-10,
    traj_index: int = 0,
) -> PathRecord:
    """Simulate a single trajectory to exit, drawing from ``stream``.

    The stream is consumed in the documented order (σ₀ first for the uniform
    law, then one exponential per switch event), so passing a freshly seeded
    generator reproduces the path exactly.
    """
    _check_exit_args(model, mu, r, gamma)
    comp = _compiled(model)
    theta_thr = _theta_threshold(mu, r, gamma, warn=True)
    sigma0 = _draw_sigma0(sigma0_law, stream)
    status, tau, side, theta, n_switches = _kernels.exit_kernel(
        comp.code_p,
        comp.consts_p,
        comp.code_m,
        comp.consts_m,
        comp.new_stack(),
        mu,
        r,
        theta_thr,
        sigma0,
        ode_tol,
        comp.h_cap,
        EVENT_CAP,
        stream,
    )
    if status == _kernels.STATUS_CAP:
        raise EventCapError(f"path exceeded {EVENT_CAP} switch events")
    if status != _kernels.STATUS_OK:
        raise RuntimeError("path hit a non-finite state")
    a = model.a
    has_theta = theta >= 0.0
    return PathRecord(
        tau=tau,
        side=int(side),
        theta=theta if has_theta else None,
        n_switches=int(n_switches),
        traj_index=traj_index,
        centered_tau=tau - math.log(mu) / (2.0 * a),
        centered_theta=(theta - (0.5 - gamma) / a * math.log(mu)) if has_theta else None,
    )


def run_ensemble(
    model: ModelPair,
    mu: float,
    r: float,
    gamma: float,
    n: int,
    master_seed: int,
    workers: int = 1,
    *,
    sigma0_law: str = "uniform",
    ode_tol: float = 1e-10,
) -> Ensemble:
    """Simulate n independent trajectories; byte-identical for any workers.

    Trajectory i is a pure function of (master_seed, i), so the partition of
    indices across threads cannot affect the result, only the wall time.
    """
    _check_exit_args(model, mu, r, gamma)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers!r}")
    comp = _compiled(model)
    theta_thr = _theta_threshold(mu, r, gamma, warn=True)

    records: list[PathRecord | None] = [None] * n

    def run_chunk(lo: int, hi: int) -> None:
        stack = comp.new_stack()  # one scratch stack per worker chunk
        for i in range(lo, hi):
            records[i] = _run_one(
                comp, stack, model, mu, r, gamma, theta_thr, sigma0_law, ode_tol, master_seed, i
            )

    if workers == 1 or n == 1:
        run_chunk(0, n)
    else:
        chunk = max(1, -(-n // (workers * 4)))  # a few chunks per worker for balance
        spans = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for future in [pool.submit(run_chunk, lo, hi) for lo, hi in spans]:
                future.result()

    return Ensemble(
        records=tuple(records),  # type: ignore[arg-type]
        model=ModelDescriptor(
            f_plus=serialize(model.f_plus), f_minus=serialize(model.f_minus), R=model.R
        ),
        mu=mu,
        r=r,
        gamma=gamma,
        master_seed=master_seed,
        n=n,
    )


def martingale_probe(
    model: ModelPair,
    mu: float,
    T: float,
    n: int,
    master_seed: int,
    *,
    sigma0_law: str = "plus",
    ode_tol: float = 1e-10,
) -> MartingaleReport:
    """Check the martingale Z_t = σ_t + 2μ∫₀ᵗσ_s ds over n paths to time T.

    Z is a martingale with Z_0 = σ_0 and quadratic variation [Z]_T = 4·B(T),
    B the rate-μ Poisson flip count, so mean(Z_T) estimates σ₀ and
    mean(4·B(T)) estimates 4μT.  σ₀ defaults to +1 so the martingale mean
    has a deterministic target.  Raises :class:`PathExitedDomainError` if
    any path leaves [−R, R] before T — choose T accordingly.
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu!r}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    comp = _compiled(model)
    stack = comp.new_stack()
    z = np.empty(n, dtype=np.float64)
    qv = np.empty(n, dtype=np.float64)
    for i in range(n):
        rng = _substream(master_seed, i)
        sigma0 = _draw_sigma0(sigma0_law, rng)
        status, sigma_T, int_sigma, n_flips, x_T = _kernels.horizon_kernel(
            comp.code_p,
            comp.consts_p,
            comp.code_m,
            comp.consts_m,
            stack,
            mu,
            T,
            model.R,
            sigma0,
            ode_tol,
            comp.h_cap,
            EVENT_CAP,
            rng,
        )
        if status == _kernels.STATUS_DOMAIN:
            raise PathExitedDomainError(
                f"trajectory {i} reached |x| = R = {model.R} before T = {T}; reduce T"
            )
        if status == _kernels.STATUS_CAP:
            raise EventCapError(f"trajectory {i} exceeded {EVENT_CAP} switch events")
        if status != _kernels.STATUS_OK:
            raise RuntimeError(f"trajectory {i} hit a non-finite state")
        z[i] = sigma_T + 2.0 * mu * int_sigma
        qv[i] = 4.0 * n_flips
    return MartingaleReport(
        T=T,
        n=n,
        mean_Z_T=float(np.mean(z)),
        se_Z_T=float(np.std(z, ddof=1) / math.sqrt(n)),
        mean_qv=float(np.mean(qv)),
        expected_qv=4.0 * mu * T,
    )
