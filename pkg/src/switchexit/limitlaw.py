"""Closed-form limiting distributions of the exit problem.

As the switching rate μ → ∞ the pair (exit side, exit time − (1/2a)·log μ)
converges in law to

    side = sgn N,    time = −(1/a)·log|N| + D(side·r),

with N standard Gaussian.  Conditioning on the side (sgn N and |N| are
independent) gives the CDF

    G_s(t) = P(−(1/a)log|N| + D(s·r) ≤ t) = 2·(1 − Φ(e^{−a(t − D(s·r))})).

The intermediate stopping time θ (first time |x| reaches μ^{−γ}), centered by
((1/2−γ)/a)·log μ, converges to −(1/a)·log|H| with H ~ N(0, f0²/(2a)); its
CDF is the same expression with the shift log(√(2a)/f0)/a in place of D —
which is exactly the last summand of D, tying the two limits together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["LimitLaw", "normal_cdf", "limit_cdf", "theta_limit_cdf", "sample_limit", "law_for_model"]

# exp() overflows past ~709; beyond this the CDF is 0 to double precision anyway
_EXP_CAP = 700.0


def normal_cdf(u: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-u / math.sqrt(2.0))


@dataclass(frozen=True)
class LimitLaw:
    a: float
    f0: float
    r: float
    D_plus: float   # D(r)
    D_minus: float  # D(−r)

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.f0 > 0 and self.r > 0):
            raise ValueError(f"need a, f0, r positive, got a={self.a!r} f0={self.f0!r} r={self.r!r}")


def limit_cdf(law: LimitLaw, side: int, t: float) -> float:
    """Conditional CDF of the limiting centered exit time given the exit side.

    The joint CDF of (side, time) is ½·limit_cdf(side, t) because each side
    carries probability ½.
    """
    if side not in (+1, -1):
        raise ValueError(f"side must be +1 or -1, got {side!r}")
    D = law.D_plus if side > 0 else law.D_minus
    z = -law.a * (t - D)
    if z > _EXP_CAP:
        return 0.0
    return 2.0 * (1.0 - normal_cdf(math.exp(z)))


def theta_limit_cdf(law: LimitLaw, t: float) -> float:
    """CDF of −(1/a)·log|H| with H ~ N(0, f0²/(2a)): the centered-θ limit."""
    z = -law.a * t
    if z > _EXP_CAP:
        return 0.0
    u = (math.sqrt(2.0 * law.a) / law.f0) * math.exp(z)
    if not math.isfinite(u):
        return 0.0
    return 2.0 * (1.0 - normal_cdf(u))


def sample_limit(law: LimitLaw, n: int, seed: int) -> np.ndarray:
    """Draw n samples of (side, t) from the limit law.

    Returns a structured array with fields ``side`` (int8, ±1) and ``t``
    (float64) — a sequence of (side, t) records.  Deterministic per seed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal(n)
    # N = 0 exactly has probability zero but would break log|N|; redraw.
    zero = gauss == 0.0
    while zero.any():
        gauss[zero] = rng.standard_normal(int(zero.sum()))
        zero = gauss == 0.0
    out = np.empty(n, dtype=[("side", np.int8), ("t", np.float64)])
    plus = gauss > 0.0
    out["side"] = np.where(plus, 1, -1)
    out["t"] = -np.log(np.abs(gauss)) / law.a + np.where(plus, law.D_plus, law.D_minus)
    return out


def law_for_model(model, r: float, tol: float = 1e-10) -> LimitLaw:
    """Assemble the LimitLaw of a validated model at exit level r."""
    from .flow import d_shift

    if not 0 < r <= model.R:
        raise ValueError(f"need 0 < r <= R={model.R}, got r={r!r}")
    return LimitLaw(
        a=model.a,
        f0=model.f0,
        r=r,
        D_plus=d_shift(model, r, tol).D,
        D_minus=d_shift(model, -r, tol).D,
    )
