import math
import random

import pytest
from mpmath import mp, mpf
from pydantic import ValidationError

from app.schemas.detection import MagnitudeEstimate, ViolationHypothesis
from app.services.detection_service import detection_service

# 已验证 RH 的高度
T_CONFIRMED = 2.4e12


def test_exponent_limits():
    assert detection_service.tn_exponent(0.5) == 5
    assert detection_service.tni_exponent(0.5) == 3
    assert detection_service.tn_exponent(0.1) == pytest.approx(21)


def test_best_case_thresholds():
    h = ViolationHypothesis(t=0.49999, T=T_CONFIRMED, T0=1e12)
    tn = detection_service.threshold_tn(h)
    tni = detection_service.threshold_tni(h)
    assert tn.log10 == pytest.approx(5 * math.log10(T_CONFIRMED), abs=1e-2)
    assert tni.exponent == 37
    assert tni.mantissa == pytest.approx(1.4, abs=0.05)


def test_tni_always_below_tn():
    rng = random.Random(20)
    for _ in range(100):
        h = ViolationHypothesis(t=rng.uniform(0.01, 0.49), T=10 ** rng.uniform(12.5, 20))
        assert detection_service.threshold_tni(h).log10 < detection_service.threshold_tn(h).log10


def test_hypothesis_validation():
    with pytest.raises(ValidationError):
        ViolationHypothesis(t=0.6, T=1e13)
    with pytest.raises(ValidationError):
        ViolationHypothesis(t=0, T=1e13)
    with pytest.raises(ValidationError):
        ViolationHypothesis(t=0.3, T=1e12)
    assert ViolationHypothesis(t=0.3, T=1e13).T0 == T_CONFIRMED


def test_signal_at_tn_threshold():
    # n = T⁵, t = ½ 时 |Fₙ(ρ)| ≈ √2 / ln n
    h = ViolationHypothesis(t=0.5 - 1e-12, T=1e13)
    n = 10 ** 65
    assert detection_service.signal_magnitude(h, n) == pytest.approx(math.sqrt(2) / math.log(n), rel=1e-6)


def test_signal_doubling_ratio():
    h = ViolationHypothesis(t=0.3, T=1e14)
    n = 10 ** 40
    ratio = detection_service.signal_magnitude(h, 2 * n) / detection_service.signal_magnitude(h, n)
    assert ratio == pytest.approx(2 ** 0.3 * math.log(n) / math.log(2 * n), rel=1e-9)


@pytest.mark.parametrize("n, slope0, slope_pi", [(1, 3, (1, 3)), (2, 10, (10, 21))])
def test_endpoint_slopes_small_n(n, slope0, slope_pi):
    slopes = detection_service.theta_endpoint_slopes(n)
    assert slopes.slope0 == slope0
    with mp.workdps(40):
        numerator, denominator = slope_pi
        assert abs(slopes.slope_pi - mpf(numerator) / denominator) < mpf(10) ** -28


@pytest.mark.parametrize("n", [5, 100, 1000])
def test_endpoint_slope_digamma_form(n):
    slopes = detection_service.theta_endpoint_slopes(n)
    assert slopes.slope0 == n * (2 * n + 1)
    with mp.workdps(40):
        assert abs(slopes.slope_pi - slopes.slope_pi_digamma) < 1e-20


def test_required_working_digits():
    estimate = detection_service.required_working_digits(2 * 10 ** 36)
    assert estimate.exponent == 36
    assert estimate.mantissa == pytest.approx(1.53, abs=0.01)


def test_magnitude_estimate():
    assert str(MagnitudeEstimate.from_log10(2.0)) == "1.00e+02"
    assert str(MagnitudeEstimate.from_log10(-3.5)) == "3.16e-04"
    rounded = MagnitudeEstimate.from_log10(1.99999999999)
    assert (rounded.mantissa, rounded.exponent) == (1.0, 2)


def test_report_text():
    text = detection_service.report(ViolationHypothesis(t=0.25, T=1e13))
    assert "TN  指数 1+2/t = 9.0000" in text
    assert "TNI 指数 1+1/t = 5.0000" in text
    assert "n ≳ 1.00e+65" in text
