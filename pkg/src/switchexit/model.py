"""Validated vector-field pair (f₊, f₋) and its derived quantities.

The simulated system switches between two scalar fields.  Everything
downstream — the averaged flow, the exit-time analytics, the limit law —
depends on a handful of numbers extracted here:

    F(x) = (f₊(x) + f₋(x)) / 2      averaged drift, unstable equilibrium at 0
    G(x) = (f₊(x) − f₋(x)) / 2      switching gap, must stay positive
    a    = F'(0) > 0                 instability rate
    f0   = f₊(0) = −f₋(0) > 0       field strength at the equilibrium

Validation is by dense grid: 10 001 equispaced points of [−R, R] plus a
refinement near 0.  A grid check cannot prove sgn F(x) = sgn x or G > 0
everywhere — it is a configuration-mistake detector, not a certificate; use
smooth fields for which the sign conditions hold analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exprlang import EvalError, Expr, differentiate, evaluate, parse, serialize

__all__ = ["ModelPair", "AssumptionError", "build_model", "drift_F", "gap_G", "describe"]

_SYM_TOL = 1e-12


class AssumptionError(Exception):
    """A model assumption failed; names the assumption and a witness x."""

    def __init__(self, assumption: str, witness: float | None = None):
        msg = assumption if witness is None else f"{assumption} (witness x={witness!r})"
        super().__init__(msg)
        self.assumption = assumption
        self.witness = witness


@dataclass(frozen=True)
class ModelPair:
    """Immutable validated pair; safe to share across worker threads."""

    f_plus: Expr
    f_minus: Expr
    R: float
    a1: float        # f₊'(0)
    a_minus1: float  # f₋'(0)
    a: float         # (a1 + a_minus1) / 2
    f0: float        # f₊(0)
    c_est: float     # grid estimate of sup |f''| over both fields


def _grid(R: float) -> np.ndarray:
    base = np.linspace(-R, R, 10_001)
    span = min(1e-3, R)
    fine = np.linspace(-span, span, 21)
    return np.unique(np.concatenate([base, fine]))


def build_model(f_plus_text: str, f_minus_text: str, R: float) -> ModelPair:
    """Parse, differentiate, and grid-validate a field pair.

    Raises :class:`~switchexit.exprlang.ParseError` for bad expression text
    and :class:`AssumptionError` (with a witness point where applicable) for
    violated model assumptions.
    """
    if not R > 0:
        raise AssumptionError(f"domain radius R must be positive, got {R!r}")
    f_plus = parse(f_plus_text)
    f_minus = parse(f_minus_text)

    d_plus = differentiate(f_plus)
    d_minus = differentiate(f_minus)
    dd_plus = differentiate(d_plus)
    dd_minus = differentiate(d_minus)

    try:
        f0 = evaluate(f_plus, 0.0)
        fm0 = evaluate(f_minus, 0.0)
        a1 = evaluate(d_plus, 0.0)
        a_minus1 = evaluate(d_minus, 0.0)
    except EvalError as e:
        raise AssumptionError(f"field not evaluable at 0: {e}") from e

    if not f0 > 0.0:
        raise AssumptionError(f"f_plus(0) must be positive, got {f0!r}", 0.0)
    if abs(fm0 + f0) > _SYM_TOL:
        raise AssumptionError(
            f"f_minus(0) must equal -f_plus(0) to {_SYM_TOL:g}: "
            f"f_plus(0)={f0!r}, f_minus(0)={fm0!r}",
            0.0,
        )
    a = 0.5 * (a1 + a_minus1)
    if not a > 0.0:
        raise AssumptionError(
            f"instability rate a = (f_plus'(0)+f_minus'(0))/2 must be positive, got {a!r}"
        )

    c_est = 0.0
    for x in _grid(R):
        xf = float(x)
        try:
            p = evaluate(f_plus, xf)
            m = evaluate(f_minus, xf)
            cp = evaluate(dd_plus, xf)
            cm = evaluate(dd_minus, xf)
        except EvalError as e:
            raise AssumptionError(f"field not evaluable on [-R, R]: {e}", xf) from e
        F = 0.5 * (p + m)
        G = 0.5 * (p - m)
        if xf != 0.0 and not (F > 0.0 if xf > 0.0 else F < 0.0):
            raise AssumptionError(f"sgn F(x) = sgn x fails: F({xf!r}) = {F!r}", xf)
        if not G > 0.0:
            raise AssumptionError(f"G(x) = (f_plus - f_minus)/2 not positive: G({xf!r}) = {G!r}", xf)
        c_est = max(c_est, abs(cp), abs(cm))

    return ModelPair(
        f_plus=f_plus,
        f_minus=f_minus,
        R=float(R),
        a1=a1,
        a_minus1=a_minus1,
        a=a,
        f0=f0,
        c_est=c_est,
    )


def _check_domain(model: ModelPair, x: float) -> None:
    if abs(x) > model.R:
        raise ValueError(f"x={x!r} outside the working domain [-{model.R}, {model.R}]")


def drift_F(model: ModelPair, x: float) -> float:
    """Averaged drift F(x) = (f₊(x) + f₋(x))/2."""
    _check_domain(model, x)
    return 0.5 * (evaluate(model.f_plus, x) + evaluate(model.f_minus, x))


def gap_G(model: ModelPair, x: float) -> float:
    """Switching gap G(x) = (f₊(x) − f₋(x))/2."""
    _check_domain(model, x)
    return 0.5 * (evaluate(model.f_plus, x) - evaluate(model.f_minus, x))


def describe(model: ModelPair) -> str:
    """Human-readable validation report (used by the CLI)."""
    lines = [
        f"f_plus   : {serialize(model.f_plus)}",
        f"f_minus  : {serialize(model.f_minus)}",
        f"domain   : [-{model.R}, {model.R}]",
        f"f_plus'(0)  = {model.a1!r}",
        f"f_minus'(0) = {model.a_minus1!r}",
        f"a = F'(0)   = {model.a!r}",
        f"f0 = f_plus(0) = {model.f0!r}",
        f"sup|f''| (grid estimate) = {model.c_est!r}",
        "grid checks : sgn F(x) = sgn x and G(x) > 0 hold on the validation grid",
    ]
    return "\n".join(lines)
