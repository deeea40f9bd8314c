import pytest
from mpmath import mp, mpf

from app.exceptions import DomainError, PrecisionShortfallError
from app.schemas.centered import W_TILDE_MAX
from app.services.centered_service import centered_service
from app.services.lambda_service import lambda_service
from app.services.special_values_service import special_values_service


def law(n, w_tilde):
    with mp.workdps(30):
        return float(mp.sqrt(w_tilde) * (mp.log(n) + lambda_service.asymptotic_constant()))


def test_single_term_value():
    cfg = centered_service.build_config(1.0, 1, 40)
    value = centered_service.centered_lambda(1, cfg, special_values_service.build_table(1, 60))
    with mp.workdps(40):
        r0, r1 = mp.sqrt(2), mp.sqrt(10)
        expected = 2 / (r1 + 1) ** 2 * (r1 + r0) * (2 * r1) / (r1 - r0) * mp.log(mp.pi / 3)
        assert abs(value - expected) < mpf(10) ** -20
    assert float(value) == pytest.approx(0.088154, abs=1e-6)


def test_w_tilde_range():
    with pytest.raises(DomainError):
        centered_service.build_config(800.0, 3, 30)
    with pytest.raises(DomainError):
        centered_service.build_config(-1.0, 3, 30)
    assert centered_service.build_config(W_TILDE_MAX - 0.1, 3, 30).n == 3


def test_radii():
    cfg = centered_service.build_config(2.0, 20, 30)
    assert len(cfg.radii) == 21
    assert all(b > a for a, b in zip(cfg.radii, cfg.radii[1:]))
    with mp.workdps(30):
        assert abs(cfg.radii[0] - mp.sqrt(mpf(3) / 2)) < mpf(10) ** -25


def test_config_too_short():
    cfg = centered_service.build_config(1.0, 3, 30)
    with pytest.raises(DomainError):
        centered_service.centered_coefficients(5, cfg)


def test_log_magnitudes_match_weights():
    n = 12
    cfg = centered_service.build_config(1.0, n, 50)
    with mp.workdps(50):
        weights = centered_service.centered_coefficients(n, cfg)
        logs = centered_service.centered_log_magnitudes(n, cfg)
        for w, log_w in zip(weights, logs):
            assert abs(mp.log(abs(w)) - log_w) < mpf(10) ** -40


def test_continuous_in_w_tilde():
    table = special_values_service.build_table(1, 60)
    a = centered_service.centered_lambda(1, centered_service.build_config(0.5, 1, 40), table)
    b = centered_service.centered_lambda(1, centered_service.build_config(0.500001, 1, 40), table)
    assert abs(a - b) < 1e-5


def test_empty_scan():
    assert centered_service.centered_scan([]) == []


def test_table_shortfall():
    cfg = centered_service.build_config(1.0, 5, 60)
    with pytest.raises(PrecisionShortfallError):
        centered_service.centered_lambda(5, cfg, special_values_service.build_table(3, 60))


def test_near_law_at_100(xi_table):
    cfg = centered_service.build_config(1.0, 100, 150)
    value = centered_service.centered_lambda(100, cfg, xi_table, validate=False)
    assert abs(float(centered_service.remainder(100, 1.0, value))) < 0.2


def test_scaling_with_w_tilde(xi_table):
    cfg = centered_service.build_config(4.0, 100, 150)
    value = float(centered_service.centered_lambda(100, cfg, xi_table, validate=False))
    assert value == pytest.approx(law(100, 4.0), rel=0.2)


def test_validated_precision(xi_table):
    cfg = centered_service.build_config(1.0, 50, 120)
    value = centered_service.centered_lambda(50, cfg, xi_table, validate=True)
    assert value > 0


def test_scan_rows_and_remainder():
    rows = centered_service.centered_scan([3, 1, 2, 2])
    assert [row.n for row in rows] == [1, 2, 3]
    with mp.workdps(30):
        for row in rows:
            assert abs(row.remainder - (row.value - law(row.n, 1.0))) < 1e-12


def test_scan_parallel_matches_sequential():
    sequential = centered_service.centered_scan(range(1, 7))
    parallel = centered_service.centered_scan(range(1, 7), workers=2)
    for a, b in zip(sequential, parallel):
        assert a.n == b.n
        assert abs(a.value - b.value) < mpf(10) ** -12


@pytest.mark.slow
def test_near_law_up_to_1000():
    rows = centered_service.centered_scan([10, 100, 1000], workers=4)
    remainders = [abs(float(row.remainder)) for row in rows]
    assert remainders[1] < 0.2
    assert remainders[2] < 0.2
    assert remainders[2] < remainders[0]


@pytest.mark.slow
def test_scaling_at_500(xi_table):
    cfg_one = centered_service.build_config(1.0, 500, 500)
    cfg_four = centered_service.build_config(4.0, 500, 500)
    one = float(centered_service.centered_lambda(500, cfg_one, xi_table, validate=False))
    four = float(centered_service.centered_lambda(500, cfg_four, xi_table, validate=False))
    assert four / 2 == pytest.approx(one, rel=0.25)
    for w_tilde in (0.5, 2.0):
        cfg = centered_service.build_config(w_tilde, 500, 500)
        value = float(centered_service.centered_lambda(500, cfg, xi_table, validate=False))
        assert value / w_tilde ** 0.5 == pytest.approx(one, rel=0.25)
