import math

import pytest
from mpmath import mp, mpc, mpf

from app.exceptions import DomainError, InputFileError, ZeroTableError
from app.schemas.zeros import ZeroTable
from app.services.lambda_service import lambda_service
from app.services.precision_service import precision_service
from app.services.special_values_service import special_values_service
from app.services.zeros_service import FIRST_ZERO_ORDINATE, zeros_service

RHO_1 = mpc(0.5, 14.134725141734693)


def f1_closed_form(x):
    # F₁(x) = ½ log[x(x−2)³/(x−1)⁴]
    return (mp.log(x) + 3 * mp.log(x - 2) - 4 * mp.log(x - 1)) / 2


def write_lines(tmp_path, text):
    path = tmp_path / "zeros.txt"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_load_zeros_parses_and_skips_comments(tmp_path):
    table = zeros_service.load_zeros(write_lines(tmp_path, "# 注释\n14.134725\n\n21.022040  # 第二个\n"))
    assert table.count == 2
    assert table.ordinates == [14.134725, 21.022040]
    assert table.source.endswith("zeros.txt")


def test_load_zeros_monotonicity_error(tmp_path):
    with pytest.raises(ZeroTableError) as excinfo:
        zeros_service.load_zeros(write_lines(tmp_path, "21.0\n14.1\n"))
    assert excinfo.value.line_no == 2


@pytest.mark.parametrize("content, line_no", [("14.1\n-3\n", 2), ("abc\n", 1), ("14.1\n21.0\n0\n", 3)])
def test_load_zeros_bad_lines(tmp_path, content, line_no):
    with pytest.raises(ZeroTableError) as excinfo:
        zeros_service.load_zeros(write_lines(tmp_path, content))
    assert excinfo.value.line_no == line_no


def test_load_zeros_missing_file(tmp_path):
    with pytest.raises(InputFileError):
        zeros_service.load_zeros(str(tmp_path / "missing.txt"))


def test_generated_table(zero_table):
    assert zero_table.count == 100
    assert zero_table.ordinates[0] == pytest.approx(FIRST_ZERO_ORDINATE, abs=1e-9)


def test_f1_at_ten():
    assert float(zeros_service.f_n(10, 1).real) == pytest.approx(0.5 * math.log(10 * 8 ** 3 / 9 ** 4), abs=1e-14)
    assert float(zeros_service.f_n(10, 1).real) == pytest.approx(-0.12399, abs=1e-5)


def test_f1_matches_closed_form_at_sample_points():
    points = [mpc(3 + 2 * k, 0) for k in range(5)] + [mpc(-1 - 3 * k, 0) for k in range(5)]
    points += [mpc(0.5, 5 * (k + 1)) for k in range(5)] + [mpc(2 * k - 3, -(k + 1)) for k in range(5)]
    for x in points:
        value = zeros_service.f_n(x, 1, 30)
        with mp.workdps(40):
            assert abs(value - f1_closed_form(x)) < mpf(10) ** -28


def test_f1_far_away():
    x = 10 ** 6
    value = zeros_service.f_n(x, 1, 30)
    with mp.workdps(50):
        assert abs(value.real + mpf(1) / x + mpf(2) / x ** 2) < 1e-17
        assert abs(value.imag) == 0


def test_conjugate_symmetry():
    for n in (1, 4, 9):
        x = mpc(3.5, 7.25)
        assert abs(zeros_service.f_n(mp.conj(x), n) - mp.conj(zeros_service.f_n(x, n))) < 1e-14


def test_cut_is_rejected():
    with pytest.raises(DomainError):
        zeros_service.f_n(3, 2)
    with pytest.raises(DomainError):
        zeros_service.f_n(0, 1)
    with pytest.raises(DomainError):
        zeros_service.f_n_quadrature(1.5, 1)


def test_negative_axis_is_real():
    evaluation = zeros_service.evaluate_f_n(-5, 3)
    assert evaluation.value.imag == 0
    assert "负实轴" in evaluation.branch_note


def test_quadrature_oracle():
    x = mpc(0.5, 14.134725)
    exact = zeros_service.f_n(x, 2, 20)
    assert abs(zeros_service.f_n_quadrature(x, 2, 20) - exact) < 1e-12
    lower = mp.conj(x)
    assert abs(zeros_service.f_n_quadrature(lower, 2, 20) - zeros_service.f_n(lower, 2, 20)) < 1e-12


def test_g_factor():
    assert float(zeros_service.g_factor(1).real) == pytest.approx(math.sqrt(math.pi), abs=1e-12)
    with pytest.raises(DomainError):
        zeros_service.g_factor(4)
    # x = 0 为可去奇点, g(0) = 1/√π
    assert float(zeros_service.g_factor(0).real) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-12)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_gn_forms_agree(n):
    for x in (mpc(0.3, 2.0), mpc(0.5, 14.134725), mpc(-2.5, 0.7)):
        assert abs(zeros_service.g_n_product(x, n) - zeros_service.g_n_gamma_form(x, n)) < 1e-20


def test_far_field_matches_logs():
    x = mpc(0.5, 300)
    with mp.workdps(30):
        assert abs(zeros_service.f_n_far_field(x, 3, 20) - zeros_service.f_n(x, 3, 20)) < mpf(10) ** -19


def test_far_field_rejects_inner_points():
    with pytest.raises(DomainError):
        zeros_service.f_n_far_field(mpc(0.5, 5), 3, 15)
    with pytest.raises(DomainError):
        zeros_service.f_n_far_field(mpc(0.5, 7), 3, 15)


def test_far_field_radius_grows_with_n():
    assert zeros_service.far_field_radius(1, 15) < zeros_service.far_field_radius(10, 15)
    assert zeros_service.far_field_radius(10, 15) > 20


@pytest.mark.parametrize("n", [1, 5, 20])
def test_decay_law(n):
    k = zeros_service.decay_constant(n)
    for x in (10 ** 3, 10 ** 4):
        value = zeros_service.f_n(x, n)
        with mp.workdps(60):
            assert float(abs(value + mpf(1) / x)) * x ** 2 <= k


def test_asymptotic_form_errors():
    with pytest.raises(DomainError):
        zeros_service.f_n_asymptotic(2, 100)
    with pytest.raises(DomainError):
        zeros_service.f_n_asymptotic(1, 100)
    with pytest.raises(DomainError):
        zeros_service.f_n_asymptotic(RHO_1, 1)


def test_asymptotic_form_tracks_exact_value():
    ratio = zeros_service.f_n_asymptotic(RHO_1, 1000) / zeros_service.f_n(RHO_1, 1000)
    assert 0.3 < abs(ratio) < 3


@pytest.mark.slow
def test_asymptotic_ratio_improves_with_n():
    far = [abs(zeros_service.f_n_asymptotic(RHO_1, n) / zeros_service.f_n(RHO_1, n) - 1) for n in (1000, 10000)]
    assert far[1] < far[0]


def test_modulus_estimate_consistency():
    t, height, n = 0.25, 1e6, 10 ** 10
    rho = mpc(0.5 + t, height)
    full = float(abs(zeros_service.f_n_asymptotic(rho, n)))
    estimate = zeros_service.modulus_estimate(complex(0.5 + t, height), n)
    assert estimate == pytest.approx((2 * n / height) ** t / (height ** 2 * math.log(n)))
    assert full / 3 < estimate < full * 3


def test_zero_sum_empty():
    value, tail = zeros_service.zero_sum_lambda(1, ZeroTable(ordinates=[]), 0)
    assert value == 0
    assert tail > 0.0691764


def test_zero_sum_needs_enough_zeros(zero_table):
    with pytest.raises(ZeroTableError):
        zeros_service.zero_sum_lambda(1, zero_table, zero_table.count + 1)


def test_zero_sum_converges_to_direct(zero_table):
    plan = precision_service.plan_for(1, 12)
    direct = lambda_service.lambda_direct(1, plan, special_values_service.build_table(1, 40)).value
    gaps = []
    tails = []
    for pairs in (25, 50, 100):
        value, tail = zeros_service.zero_sum_lambda(1, zero_table, pairs)
        gaps.append(abs(float(value - direct)))
        tails.append(tail)
    assert gaps[2] <= tails[2]
    assert gaps[0] > gaps[1] > gaps[2]
    assert tails[0] > tails[1] > tails[2]


@pytest.mark.parametrize("n", [2, 5])
def test_zero_sum_within_tail(zero_table, xi_table, n):
    direct = lambda_service.lambda_direct(n, precision_service.plan_for(n, 12), xi_table).value
    value, tail = zeros_service.zero_sum_lambda(n, zero_table, zero_table.count)
    assert abs(float(value - direct)) <= max(1e-2, tail)


def test_zero_sum_parallel_matches(zero_table):
    sequential, _ = zeros_service.zero_sum_lambda(3, zero_table, 100)
    parallel, _ = zeros_service.zero_sum_lambda(3, zero_table, 100, workers=2)
    assert abs(sequential - parallel) < 1e-13


def test_keiper_lambda(zero_table):
    assert zeros_service.keiper_lambda(1, zero_table, 0) == 0.0
    value = zeros_service.keiper_lambda(1, zero_table, 100)
    # λ₁ᴷ 的完整零点和 ≈ 0.0230957
    assert 0 < 0.0230957 - value <= zeros_service.keiper_tail_bound(zero_table, 100)
    assert zeros_service.keiper_li_lambda(value, 1) == value


def test_keiper_lambda_matches_mpmath_for_large_n(zero_table):
    n = 50
    value = zeros_service.keiper_lambda(n, zero_table, 10)
    with mp.workdps(30):
        expected = mp.fsum(2 * mp.re(1 - (1 - 1 / mpc(0.5, g)) ** n) / n for g in zero_table.ordinates[:10])
    assert value == pytest.approx(float(expected), abs=1e-13)


@pytest.mark.slow
@pytest.mark.parametrize("n", range(1, 11))
def test_zero_sum_with_odlyzko_table(odlyzko_table, n):
    direct = lambda_service.compute(n, 12).value
    value, tail = zeros_service.zero_sum_lambda(n, odlyzko_table, 100000)
    assert abs(float(value - direct)) <= max(1e-2, tail)


@pytest.mark.slow
def test_zero_sum_discrepancy_shrinks_with_pairs(odlyzko_table):
    direct = lambda_service.compute(5, 12).value
    results = [zeros_service.zero_sum_lambda(5, odlyzko_table, p) for p in (25000, 50000, 100000)]
    gaps = [abs(float(value - direct)) for value, _ in results]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= results[2][1]


@pytest.mark.slow
def test_keiper_with_odlyzko_table(odlyzko_table):
    assert zeros_service.keiper_lambda(1, odlyzko_table, 100000) == pytest.approx(0.023096, abs=1e-4)
    with mp.workdps(30):
        law = float(mp.log(100) / 2 + lambda_service.keiper_constant())
    assert abs(zeros_service.keiper_lambda(100, odlyzko_table, 100000) - law) < 0.05
