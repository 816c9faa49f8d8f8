"""Deterministic analytics for the averaged ODE  ż = F(z).

Three quantities drive the exit-time asymptotics:

* the flow map S^t x0 (adaptive Runge–Kutta),
* the hitting time  t(δ, r) = ∫_δ^r dx / F(x)  of level r started from δ
  (separation of variables — quadrature, not event detection),
* the nonlinearity correction  K(r) = ∫_0^r (1/F(x) − 1/(a x)) dx  and the
  total shift  D(r) = K(r) + log|r|/a + log(√(2a)/f0)/a.

The K integrand has a removable singularity at 0 (its limit is −F''(0)/(2a²)),
so the integral is taken over [sgn(r)·ε, r] with ε = 1e−8 plus a one-rectangle
stub ε·g(sgn(r)·ε/2) for the truncated piece; the neglected error is of order
ε·|g| and far below the tolerances used anywhere in the package.

Evaluating 1/F − 1/(ax) directly is numerically hopeless very close to 0:
F(x) = (f₊(x)+f₋(x))/2 is a cancelling sum there (f₊(0) = −f₋(0)), so F
carries absolute rounding noise ~ε_mach·f0 and the integrand noise
ε_mach·f0/(ax)² integrates to ~1e−8 by itself.  Below a crossover |x| ≤ x_c
the integrand is therefore evaluated through the degree-5 Taylor expansion
of F at 0 (coefficients from symbolic derivatives):

    1/F − 1/(ax) = (ax − F)/(axF) ≈ −p(x) / (a·q(x)),
    p = c₂ + c₃x + c₄x² + c₅x³,   q = a + c₂x + c₃x² + c₄x³ + c₅x⁴,

an explicit quotient with no cancellation, smooth through 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

from scipy.integrate import IntegrationWarning, quad, solve_ivp

from .exprlang import differentiate, evaluate
from .model import ModelPair

__all__ = [
    "FlowResult",
    "ExitConstants",
    "FlowError",
    "DomainExitError",
    "QuadratureError",
    "flow_map",
    "hit_time",
    "k_constant",
    "d_shift",
]

_EPS = 1e-8  # truncation radius around the removable singularity of the K integrand


class FlowError(RuntimeError):
    pass


class DomainExitError(FlowError):
    """The flow reached ±R before the requested time."""


class QuadratureError(FlowError):
    """Adaptive quadrature did not converge to the requested tolerance."""


@dataclass(frozen=True)
class FlowResult:
    x_end: float
    t_end: float
    steps: int
    est_error: float  # budgeted bound tol·t, not an a-posteriori estimate


@dataclass(frozen=True)
class ExitConstants:
    r: float
    K: float
    D: float


def _F(model: ModelPair, x: float) -> float:
    return 0.5 * (evaluate(model.f_plus, x) + evaluate(model.f_minus, x))


def flow_map(model: ModelPair, x0: float, t: float, tol: float = 1e-10) -> FlowResult:
    """Integrate ż = F(z) from x0 over [0, t].

    Local error is controlled at ``tol`` per unit time.  Because
    sgn F(x) = sgn x, |z| is nondecreasing and the flow can never cross 0;
    the sign of x_end equals the sign of x0 by construction.  Raises
    :class:`DomainExitError` if the flow reaches ±R before time t.
    """
    if abs(x0) > model.R:
        raise ValueError(f"x0={x0!r} outside [-{model.R}, {model.R}]")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    if x0 == 0.0 or t == 0.0:
        # 0 is the (unstable) equilibrium of F; stay exactly on it.
        return FlowResult(x_end=x0, t_end=t, steps=0, est_error=0.0)

    def rhs(_s: float, y):
        return [_F(model, y[0])]

    def hit_upper(_s: float, y):
        return y[0] - model.R

    def hit_lower(_s: float, y):
        return y[0] + model.R

    hit_upper.terminal = True  # type: ignore[attr-defined]
    hit_lower.terminal = True  # type: ignore[attr-defined]

    # Local-error control overshoots the per-unit-time budget by a small
    # constant factor, so run the stepper a factor 20 below the requested
    # tolerance; the global error then stays within tol * t with margin.
    sol = solve_ivp(
        rhs,
        (0.0, t),
        [x0],
        method="RK45",
        rtol=max(tol / 20.0, 2.5e-14),
        atol=max(tol / 20.0, 1e-300),
        events=[hit_upper, hit_lower],
        dense_output=False,
    )
    if sol.status == 1:
        raise DomainExitError(
            f"flow from x0={x0!r} reached the domain boundary ±{model.R} before t={t!r}"
        )
    if sol.status != 0:
        raise FlowError(f"integrator failed: {sol.message}")
    x_end = float(sol.y[0, -1])
    if x0 != 0.0 and x_end * x0 < 0.0:
        x_end = math.copysign(abs(x_end), x0)
    return FlowResult(x_end=x_end, t_end=t, steps=len(sol.t) - 1, est_error=tol * t)


def _quad(f, lo: float, hi: float, tol: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, _est = quad(f, lo, hi, epsabs=tol, epsrel=max(tol, 1e-12), limit=200)
        except IntegrationWarning as w:
            raise QuadratureError(str(w)) from None
    return value


def hit_time(model: ModelPair, delta: float, r: float, tol: float = 1e-10) -> float:
    """Time for the averaged flow to move from δ to r: ∫_δ^r dx/F(x).

    δ and r must lie on the same side of 0 with 0 < |δ| < |r| ≤ R; the
    result is positive and strictly decreasing in |δ|.
    """
    if delta == 0.0 or r == 0.0 or (delta > 0) != (r > 0):
        raise ValueError(f"delta={delta!r} and r={r!r} must be nonzero with equal signs")
    if not abs(delta) < abs(r) <= model.R:
        raise ValueError(f"need 0 < |delta| < |r| <= R={model.R}, got delta={delta!r}, r={r!r}")
    return _quad(lambda x: 1.0 / _F(model, x), delta, r, tol)


@lru_cache(maxsize=16)
def _taylor_coeffs(model: ModelPair) -> tuple[float, float, float, float]:
    """(c₂, c₃, c₄, c₅): Taylor coefficients of F at 0 beyond the linear term."""
    coeffs = []
    dp, dm = model.f_plus, model.f_minus
    fact = 1.0
    for k in range(1, 6):
        dp = differentiate(dp)
        dm = differentiate(dm)
        fact *= k
        if k >= 2:
            coeffs.append(0.5 * (evaluate(dp, 0.0) + evaluate(dm, 0.0)) / fact)
    return tuple(coeffs)  # type: ignore[return-value]


def k_constant(model: ModelPair, r: float, tol: float = 1e-10) -> float:
    """Nonlinearity correction K(r) = ∫_0^r (1/F(x) − 1/(a·x)) dx."""
    if r == 0.0:
        raise ValueError("r must be nonzero")
    if abs(r) > model.R:
        raise ValueError(f"|r| must not exceed R={model.R}, got r={r!r}")
    a = model.a
    c2, c3, c4, c5 = _taylor_coeffs(model)

    def g_near(x: float) -> float:
        # Taylor-quotient form, accurate (and smooth) through 0.
        p = c2 + x * (c3 + x * (c4 + x * c5))
        q = a + x * (c2 + x * (c3 + x * (c4 + x * c5)))
        return -p / (a * q)

    def g(x: float) -> float:
        return 1.0 / _F(model, x) - 1.0 / (a * x)

    x_c = math.copysign(min(0.5 * abs(r), 1e-3), r)
    eps = math.copysign(_EPS, r)
    if abs(r) <= _EPS:
        return r * g_near(0.5 * r)
    stub = eps * g_near(0.5 * eps)
    return _quad(g_near, eps, x_c, tol) + _quad(g, x_c, r, tol) + stub


def d_shift(model: ModelPair, r: float, tol: float = 1e-10) -> ExitConstants:
    """The centered-exit-time shift D(r) = K(r) + log|r|/a + log(√(2a)/f0)/a."""
    K = k_constant(model, r, tol)
    a = model.a
    D = K + math.log(abs(r)) / a + math.log(math.sqrt(2.0 * a) / model.f0) / a
    return ExitConstants(r=r, K=K, D=D)
