"""Model construction, validation, and derived quantities."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from switchexit.exprlang import ParseError, evaluate
from switchexit.model import AssumptionError, build_model, describe, drift_F, gap_G


@pytest.fixture(scope="module")
def sinh_model():
    # F(x) = sinh(x), G(x) = cosh(x)
    return build_model("exp(x)", "-exp(-x)", 1.0)


@pytest.fixture(scope="module")
def linear_model():
    # F(x) = x, G(x) = 1
    return build_model("1+x", "-1+x", 1.0)


def test_sinh_exemplar_derived_constants(sinh_model) -> None:
    assert sinh_model.a1 == pytest.approx(1.0, abs=1e-14)
    assert sinh_model.a_minus1 == pytest.approx(1.0, abs=1e-14)
    assert sinh_model.a == pytest.approx(1.0, abs=1e-14)
    assert sinh_model.f0 == 1.0
    assert sinh_model.R == 1.0
    # max |f''| over [-1,1] is e, attained at the endpoints (on the grid).
    assert sinh_model.c_est == pytest.approx(math.e, rel=1e-12)


def test_linear_exemplar_derived_constants(linear_model) -> None:
    assert linear_model.a == 1.0
    assert linear_model.f0 == 1.0
    assert linear_model.c_est == 0.0


def test_drift_linear(linear_model) -> None:
    assert drift_F(linear_model, 0.3) == pytest.approx(0.3, abs=1e-15)
    assert drift_F(linear_model, 0.0) == 0.0


def test_drift_sinh(sinh_model) -> None:
    oracle = (math.e - 1.0 / math.e) / 2.0
    assert drift_F(sinh_model, 1.0) == pytest.approx(oracle, abs=1e-13)
    assert drift_F(sinh_model, 0.0) == 0.0


def test_gap_linear(linear_model) -> None:
    for x in (-1.0, -0.2, 0.0, 0.7):
        assert gap_G(linear_model, x) == 1.0


def test_gap_sinh(sinh_model) -> None:
    assert gap_G(sinh_model, 0.0) == 1.0
    oracle = (math.e + 1.0 / math.e) / 2.0
    assert gap_G(sinh_model, 1.0) == pytest.approx(oracle, abs=1e-13)


def test_domain_check(sinh_model) -> None:
    with pytest.raises(ValueError):
        drift_F(sinh_model, 1.5)
    with pytest.raises(ValueError):
        gap_G(sinh_model, -1.0000001)


# ---------------------------------------------------------------------------
# Build-time validation


def test_negative_mean_slope_rejected() -> None:
    # a = (1 + (-3))/2 = -1
    with pytest.raises(AssumptionError) as exc:
        build_model("1+x", "-1-3*x", 1.0)
    assert "a" in exc.value.assumption


def test_asymmetric_values_at_zero_rejected() -> None:
    with pytest.raises(AssumptionError):
        build_model("exp(x)", "-2*exp(-x)", 1.0)


def test_nonpositive_f0_rejected() -> None:
    with pytest.raises(AssumptionError):
        build_model("-1+x", "1+x", 1.0)


def test_wrong_drift_sign_rejected_with_witness() -> None:
    # F(x) = x - 3x^3 turns negative past x = 1/sqrt(3)
    with pytest.raises(AssumptionError) as exc:
        build_model("1+x-3*x^3", "-1+x-3*x^3", 1.0)
    assert exc.value.witness is not None
    assert abs(exc.value.witness) > 0.5


def test_nonpositive_gap_rejected_with_witness() -> None:
    # G(x) = 1 - 2x^2 turns negative past x = 1/sqrt(2); F(x) = x stays valid
    with pytest.raises(AssumptionError) as exc:
        build_model("1+x-2*x^2", "-1+x+2*x^2", 1.0)
    assert exc.value.witness is not None
    assert abs(exc.value.witness) > 0.7


def test_nonpositive_radius_rejected() -> None:
    with pytest.raises(AssumptionError):
        build_model("1+x", "-1+x", 0.0)


def test_parse_errors_propagate() -> None:
    with pytest.raises(ParseError):
        build_model("2*(1/x", "-1+x", 1.0)


def test_field_not_evaluable_on_domain_rejected() -> None:
    # log(x) leaves its domain on [-R, 0]
    with pytest.raises(AssumptionError):
        build_model("1+x+log(x)", "-1+x", 1.0)


# ---------------------------------------------------------------------------
# Structural properties


def test_model_is_immutable_and_hashable(sinh_model) -> None:
    with pytest.raises(dataclasses.FrozenInstanceError):
        sinh_model.a = 2.0
    assert hash(sinh_model) == hash(build_model("exp(x)", "-exp(-x)", 1.0))


def test_taylor_remainder_bound(sinh_model, linear_model) -> None:
    # f_s(x) = s*f0 + f_s'(0) x + remainder, |remainder| <= c_est x^2 / 2
    for m in (sinh_model, linear_model):
        c = 1.01 * m.c_est
        for x in np.linspace(-m.R, m.R, 201):
            xf = float(x)
            rp = evaluate(m.f_plus, xf) - (m.f0 + m.a1 * xf)
            rm = evaluate(m.f_minus, xf) - (-m.f0 + m.a_minus1 * xf)
            bound = c * xf * xf / 2.0 + 1e-14
            assert abs(rp) <= bound
            assert abs(rm) <= bound


def test_fields_reconstruct_from_drift_and_gap(sinh_model) -> None:
    for x in np.linspace(-1.0, 1.0, 41):
        xf = float(x)
        F = drift_F(sinh_model, xf)
        G = gap_G(sinh_model, xf)
        assert F + G == pytest.approx(evaluate(sinh_model.f_plus, xf), abs=1e-12)
        assert F - G == pytest.approx(evaluate(sinh_model.f_minus, xf), abs=1e-12)


@pytest.mark.parametrize(
    ("f_plus", "f_minus"),
    [
        ("exp(x)", "-exp(-x)"),
        ("1+x+x^2", "-1+x-x^2"),  # f_minus(x) = -f_plus(-x)
    ],
)
def test_symmetric_pairs_give_odd_drift_even_gap(f_plus: str, f_minus: str) -> None:
    m = build_model(f_plus, f_minus, 1.0)
    for x in np.linspace(0.0, 1.0, 21):
        xf = float(x)
        assert drift_F(m, -xf) == pytest.approx(-drift_F(m, xf), abs=1e-12)
        assert gap_G(m, -xf) == pytest.approx(gap_G(m, xf), abs=1e-12)


def test_describe_reports_constants(sinh_model) -> None:
    text = describe(sinh_model)
    assert "exp(x)" in text
    assert "f0" in text
    assert "a = F'(0)" in text
