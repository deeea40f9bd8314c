from fractions import Fraction

import pytest
from mpmath import mp, mpf

from app.exceptions import DomainError
from app.schemas.coefficients import CoefficientRow
from app.services.coefficient_service import coefficient_service, double_factorial


def test_double_factorial():
    assert double_factorial(-1) == 1
    assert double_factorial(1) == 1
    assert double_factorial(7) == 105
    assert double_factorial(-3) == -1
    assert double_factorial(-5) == Fraction(1, 3)
    with pytest.raises(DomainError):
        double_factorial(4)


def test_small_rows():
    assert coefficient_service.coefficient_row(1).values == [Fraction(-1, 2), Fraction(3, 2)]
    assert coefficient_service.coefficient_row(2).values == [Fraction(-3, 8), Fraction(15, 4), Fraction(35, 24)]


def test_leading_coefficient_is_negative():
    for n in (1, 2, 10, 57):
        assert coefficient_service.leading_coefficient(n) < 0
        assert coefficient_service.coefficient_row(n).a0 == coefficient_service.leading_coefficient(n)


def test_recurrence_matches_binomial_formula():
    for n in range(1, 201):
        assert coefficient_service.coefficient_row(n).values == coefficient_service.coefficient_row_binomial(n).values


def test_row_signs_and_denominators():
    for n in (1, 5, 33, 120):
        row = coefficient_service.coefficient_row(n)
        assert all(a > 0 for a in row.values[1:])
        for m, a in enumerate(row.values):
            assert (4 ** n * abs(2 * m - 1)) % a.denominator == 0


def test_sum_rules_hold_exactly():
    for n in range(1, 501):
        assert coefficient_service.check_sum_rules(coefficient_service.coefficient_row(n))


def test_sum_rules_detect_corruption():
    row = CoefficientRow(n=1, values=[Fraction(-1, 2), Fraction(1)])
    assert not coefficient_service.check_sum_rules(row)


def test_row_length_is_validated():
    with pytest.raises(ValueError):
        CoefficientRow(n=2, values=[Fraction(1), Fraction(2)])


def test_invalid_n():
    with pytest.raises(DomainError):
        coefficient_service.coefficient_row(0)


def test_moment_coefficients_n1():
    assert coefficient_service.moment_coefficients(1, 3) == [Fraction(-1), Fraction(-2), Fraction(-10, 3)]


def test_first_moment_is_minus_one():
    # Fₙ(x) ~ −1/x
    for n in (2, 7, 30):
        assert coefficient_service.moment_coefficients(n, 1) == [Fraction(-1)]


def test_to_mpf():
    with mp.workdps(40):
        assert abs(coefficient_service.to_mpf(Fraction(35, 24)) - mpf(35) / 24) < mpf(10) ** -39
