"""Limiting distributions: normal CDF, per-side exit-time CDFs, sampler."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import ndtr

from switchexit.flow import d_shift
from switchexit.limitlaw import (
    LimitLaw,
    law_for_model,
    limit_cdf,
    normal_cdf,
    sample_limit,
    theta_limit_cdf,
)
from switchexit.model import build_model
from switchexit.stats import ecdf, ks_statistic

LAW = LimitLaw(a=1.0, f0=1.0, r=0.5, D_plus=0.2, D_minus=-0.1)


# ---------------------------------------------------------------------------
# normal_cdf


def test_normal_cdf_at_zero() -> None:
    assert normal_cdf(0.0) == 0.5


def test_normal_cdf_at_one() -> None:
    assert normal_cdf(1.0) == pytest.approx(0.8413447460685429, abs=1e-12)


def test_normal_cdf_matches_independent_implementation() -> None:
    for u in np.linspace(-8.0, 8.0, 321):
        assert abs(normal_cdf(float(u)) - float(ndtr(u))) <= 1e-12


def test_normal_cdf_symmetry() -> None:
    rng = np.random.default_rng(3)
    for u in rng.uniform(-5.0, 5.0, 50):
        assert normal_cdf(-float(u)) == pytest.approx(1.0 - normal_cdf(float(u)), abs=1e-15)


# ---------------------------------------------------------------------------
# LimitLaw / limit_cdf


@pytest.mark.parametrize("bad", [dict(a=0.0), dict(f0=-1.0), dict(r=0.0)])
def test_law_validates_positivity(bad: dict) -> None:
    kwargs = dict(a=1.0, f0=1.0, r=0.5, D_plus=0.0, D_minus=0.0)
    kwargs.update(bad)
    with pytest.raises(ValueError):
        LimitLaw(**kwargs)


def test_limit_cdf_at_the_shift() -> None:
    # G_s(D(s r)) = 2 (1 - Phi(1)) = erfc(1/sqrt(2))
    expected = 0.31731050786291415
    assert limit_cdf(LAW, +1, LAW.D_plus) == pytest.approx(expected, abs=1e-12)
    assert limit_cdf(LAW, -1, LAW.D_minus) == pytest.approx(expected, abs=1e-12)


def test_limit_cdf_limits_and_monotonicity() -> None:
    for side in (+1, -1):
        assert limit_cdf(LAW, side, -1e3) == 0.0
        assert limit_cdf(LAW, side, 1e3) == pytest.approx(1.0, abs=1e-15)
        grid = np.linspace(-6.0, 6.0, 401)
        vals = [limit_cdf(LAW, side, float(t)) for t in grid]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_limit_cdf_median() -> None:
    # G_s = 1/2 at t = D - log(z_{3/4})/a with Phi(z_{3/4}) = 3/4
    z75 = 0.6744897501960817
    t_med = LAW.D_plus - math.log(z75) / LAW.a
    assert limit_cdf(LAW, +1, t_med) == pytest.approx(0.5, abs=1e-9)


def test_limit_cdf_rejects_bad_side() -> None:
    with pytest.raises(ValueError):
        limit_cdf(LAW, 0, 0.0)
    with pytest.raises(ValueError):
        limit_cdf(LAW, 2, 0.0)


def test_mixture_cdf_is_a_cdf() -> None:
    # strict positivity is only visible where exp(-a(t-D)) has not yet
    # saturated Phi, hence the left edge at -2 rather than further out
    grid = np.linspace(-2.0, 8.0, 201)
    mix = [0.5 * limit_cdf(LAW, +1, float(t)) + 0.5 * limit_cdf(LAW, -1, float(t)) for t in grid]
    assert all(b >= a for a, b in zip(mix, mix[1:]))
    assert 0.0 < mix[0] < mix[-1] < 1.0
    assert mix[-1] > 0.999


# ---------------------------------------------------------------------------
# theta_limit_cdf


def test_theta_cdf_frozen_value() -> None:
    law = LimitLaw(a=1.0, f0=1.0, r=0.5, D_plus=0.0, D_minus=0.0)
    # 2 (1 - Phi(sqrt(2))) = erfc(1)
    assert theta_limit_cdf(law, 0.0) == pytest.approx(0.15729920705028513, abs=1e-12)
    assert theta_limit_cdf(law, 1e3) == pytest.approx(1.0, abs=1e-15)


def test_theta_cdf_equals_shifted_exit_kernel() -> None:
    # -(1/a) log|H| with H ~ N(0, f0^2/(2a)) equals -(1/a) log|N| shifted by
    # log(sqrt(2a)/f0)/a, so the theta CDF is the exit-time kernel with that
    # shift in place of D.
    law = LimitLaw(a=1.3, f0=0.7, r=0.5, D_plus=0.4, D_minus=0.4)
    shift = math.log(math.sqrt(2.0 * law.a) / law.f0) / law.a
    for t in np.linspace(-5.0, 5.0, 201):
        tf = float(t)
        direct = theta_limit_cdf(law, tf)
        via_shift = 2.0 * (1.0 - normal_cdf(math.exp(-law.a * (tf - shift))))
        assert abs(direct - via_shift) <= 1e-12


def test_theta_cdf_f0_scaling() -> None:
    # replacing f0 by k f0 scales the Phi argument by 1/k, which moves the
    # CDF left: theta_cdf(t; k f0) = theta_cdf(t + log(k)/a; f0)
    k = 2.5
    base = LimitLaw(a=1.7, f0=0.9, r=0.5, D_plus=0.0, D_minus=0.0)
    scaled = LimitLaw(a=1.7, f0=k * 0.9, r=0.5, D_plus=0.0, D_minus=0.0)
    for t in np.linspace(-4.0, 4.0, 101):
        tf = float(t)
        lhs = theta_limit_cdf(scaled, tf)
        rhs = theta_limit_cdf(base, tf + math.log(k) / base.a)
        assert abs(lhs - rhs) <= 1e-12


# ---------------------------------------------------------------------------
# sample_limit


def test_sample_limit_deterministic_per_seed() -> None:
    one = sample_limit(LAW, 1000, 42)
    two = sample_limit(LAW, 1000, 42)
    other = sample_limit(LAW, 1000, 43)
    assert np.array_equal(one, two)
    assert not np.array_equal(one, other)


def test_sample_limit_shape_and_sides() -> None:
    out = sample_limit(LAW, 500, 7)
    assert out.shape == (500,)
    assert set(out.dtype.names) == {"side", "t"}
    assert set(np.unique(out["side"])) <= {-1, 1}
    with pytest.raises(ValueError):
        sample_limit(LAW, 0, 7)


def test_sample_limit_side_frequency() -> None:
    out = sample_limit(LAW, 100_000, 2024)
    frac = float(np.mean(out["side"] == 1))
    assert abs(frac - 0.5) <= 3.0 * math.sqrt(0.25 / 100_000)


@pytest.mark.parametrize("n", [1_000, 10_000, 100_000])
def test_sample_limit_ks_per_side(n: int) -> None:
    out = sample_limit(LAW, n, 90210)
    for side in (+1, -1):
        t = out["t"][out["side"] == side]
        d = ks_statistic(ecdf(t), lambda u: limit_cdf(LAW, side, u))
        assert d <= 1.36 / math.sqrt(t.size)  # 5% critical value


def test_sample_limit_median_large_n() -> None:
    out = sample_limit(LAW, 1_000_000, 5)
    z75 = 0.6744897501960817
    for side, D in ((+1, LAW.D_plus), (-1, LAW.D_minus)):
        med = float(np.median(out["t"][out["side"] == side]))
        assert med == pytest.approx(D - math.log(z75), abs=0.01)


# ---------------------------------------------------------------------------
# law_for_model


def test_law_for_model_symmetric_field() -> None:
    m = build_model("exp(x)", "-exp(-x)", 1.0)
    law = law_for_model(m, 0.5)
    assert law.a == pytest.approx(1.0, abs=1e-14)
    assert law.D_plus == pytest.approx(law.D_minus, abs=1e-10)  # odd drift
    assert law.D_plus == pytest.approx(d_shift(m, 0.5).D, abs=1e-13)


def test_law_for_model_asymmetric_field() -> None:
    # F(x) = x + x^2/2 is not odd, so the two shifts differ
    m = build_model("1+x+0.5*x^2", "-1+x+0.5*x^2", 1.0)
    law = law_for_model(m, 0.5)
    assert law.D_plus != pytest.approx(law.D_minus, abs=1e-4)
    assert law.D_plus == pytest.approx(d_shift(m, 0.5).D, abs=1e-13)
    assert law.D_minus == pytest.approx(d_shift(m, -0.5).D, abs=1e-13)


def test_law_for_model_rejects_bad_r() -> None:
    m = build_model("1+x", "-1+x", 1.0)
    with pytest.raises(ValueError):
        law_for_model(m, 0.0)
    with pytest.raises(ValueError):
        law_for_model(m, 1.5)
