import logging
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import List

from mpmath import mpf

from app.exceptions import DomainError
from app.schemas.coefficients import CoefficientRow

logger = logging.getLogger(__name__)


def double_factorial(k: int) -> Fraction:
    """
    奇数 k 的双阶乘 k!!, 负奇数按 Γ 延拓:
    (−1)!! = 1, (−3)!! = −1, (−5)!! = 1/3, 满足 k!! = (k+2)!!/(k+2)
    """
    if k % 2 == 0:
        raise DomainError(f"双阶乘只对奇数定义, 收到 k={k}")
    if k >= -1:
        result = 1
        for j in range(k, 0, -2):
            result *= j
        return Fraction(result)

    result = Fraction(1)
    for j in range(-1, k, -2):
        result /= j
    return result


class CoefficientService:
    """精确有理系数 Aₙₘ 及其求和恒等式"""

    @staticmethod
    def leading_coefficient(n: int) -> Fraction:
        """Aₙ₀ = −2⁻ⁿ (2n−1)!!/n!, 恒为负"""
        return -double_factorial(2 * n - 1) / (2 ** n * factorial(n))

    @lru_cache(maxsize=8)
    def coefficient_row(self, n: int) -> CoefficientRow:
        """由比值递推 Aₙ,ₘ₊₁/Aₙₘ = 4(n+m+½)(n−m)(2m−1)/[(2m+1)²(2m+2)] 生成整行"""
        if n < 1:
            raise DomainError(f"n={n} 必须为正整数")

        values: List[Fraction] = [self.leading_coefficient(n)]
        for m in range(n):
            ratio = Fraction(
                2 * (2 * n + 2 * m + 1) * (n - m) * (2 * m - 1),
                (2 * m + 1) ** 2 * (2 * m + 2),
            )
            values.append(values[-1] * ratio)
        return CoefficientRow(n=n, values=values)

    @staticmethod
    def coefficient_row_binomial(n: int) -> CoefficientRow:
        """直接按二项式公式 Aₙₘ = 2⁻²ⁿ/(2m−1) · C(2(n+m), n+m) · C(n+m, 2m) 计算"""
        if n < 1:
            raise DomainError(f"n={n} 必须为正整数")
        values = [
            Fraction(comb(2 * (n + m), n + m) * comb(n + m, 2 * m), 4 ** n * (2 * m - 1))
            for m in range(n + 1)
        ]
        return CoefficientRow(n=n, values=values)

    @staticmethod
    def check_sum_rules(row: CoefficientRow) -> bool:
        """
        精确验证两个求和恒等式:
        Σₘ (−1)^m Aₙₘ = 1/Aₙ₀
        2 Σₘ≥₁ (−1)^m Aₙₘ m = (−1)ⁿ + 1/Aₙ₀
        """
        a0 = row.a0
        if a0 == 0:
            return False
        first = sum((a if m % 2 == 0 else -a) for m, a in enumerate(row.values))
        second = 2 * sum((a if m % 2 == 0 else -a) * m for m, a in enumerate(row.values) if m >= 1)
        sign = 1 if row.n % 2 == 0 else -1

        ok = first == 1 / a0 and second == sign + 1 / a0
        if not ok:
            logger.error(f"求和恒等式不成立 n={row.n}, 系数实现可能有误")
        return ok

    @lru_cache(maxsize=32)
    def moment_coefficients(self, n: int, order: int) -> List[Fraction]:
        """
        Fₙ 在无穷远处的展开 Fₙ(x) = Σ_{j≥1} a_j x^(−j) 的精确系数,
        a_j = (−1)ⁿ j⁻¹ [1/Aₙ₀ − Σₘ₌₁ⁿ (−1)^m Aₙₘ (2m)^j]; 返回 [a_1, …, a_order]
        """
        row = self.coefficient_row(n)
        inv_a0 = 1 / row.a0
        sign = 1 if n % 2 == 0 else -1
        signed = [(-row[m] if m % 2 else row[m]) for m in range(n + 1)]

        coefficients = []
        powers = [Fraction(2 * m) for m in range(n + 1)]
        for j in range(1, order + 1):
            moment = sum(signed[m] * powers[m] for m in range(1, n + 1))
            coefficients.append(sign * (inv_a0 - moment) / j)
            powers = [p * (2 * m) for m, p in enumerate(powers)]
        return coefficients

    @staticmethod
    def to_mpf(q: Fraction) -> mpf:
        """按当前工作精度把有理数转换为 mpf"""
        return mpf(q.numerator) / q.denominator


# 创建单例实例
coefficient_service = CoefficientService()
