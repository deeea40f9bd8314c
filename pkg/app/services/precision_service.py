import logging
import math
from typing import Callable, Dict

import numpy as np
from mpmath import mp, mpf

from app.exceptions import DomainError, PrecisionShortfallError
from app.schemas.precision import PrecisionPlan
from app.schemas.special_values import XiLogTable
from app.services.coefficient_service import coefficient_service

logger = logging.getLogger(__name__)

# ϖ 的最大值 log₁₀(3+2√2) ≈ 0.76555, 在 r = 1/√2 处取得
PEAK_RATIO = math.log10(3 + 2 * math.sqrt(2))
PEAK_LOCATION = 1 / math.sqrt(2)

# 保护位中与目标精度无关的常数部分
BASE_GUARD_DIGITS = 15


def _xlog10x(x: float) -> float:
    # x log₁₀ x, 在 0 处按连续性取 0
    return x * math.log10(x) if x > 0 else 0.0


def _xlog10x_array(x: np.ndarray) -> np.ndarray:
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, x * np.log10(safe), 0.0)


class PrecisionService:
    """交错求和消去误差的精度模型"""

    def varpi(self, r: float) -> float:
        """ϖ(r) = −2r log₁₀ r + (1+r) log₁₀(1+r) − (1−r) log₁₀(1−r), 每个 n 所需的十进制位数"""
        if not 0 <= r <= 1:
            raise DomainError(f"ϖ 的参数 r={r} 超出 [0, 1]")
        return -2 * _xlog10x(r) + _xlog10x(1 + r) - _xlog10x(1 - r)

    def varpi_grid(self, r: np.ndarray) -> np.ndarray:
        """对数组逐点计算 ϖ"""
        r = np.asarray(r, dtype=float)
        if np.any((r < 0) | (r > 1)):
            raise DomainError("ϖ 的参数超出 [0, 1]")
        return -2 * _xlog10x_array(r) + _xlog10x_array(1 + r) - _xlog10x_array(1 - r)

    def guard_digits(self, n: int, target_digits: int) -> int:
        return target_digits + BASE_GUARD_DIGITS + math.ceil(math.log10(n + 1))

    def profile(self, n: int) -> Dict[int, int]:
        """profile(m) = ⌈n·ϖ(m/n)⌉, m = 1…n"""
        m = np.arange(1, n + 1)
        values = np.ceil(n * self.varpi_grid(m / n))
        return {int(k): max(0, int(v)) for k, v in zip(m, values)}

    def plan_for(self, n: int, target_digits: int) -> PrecisionPlan:
        """按 ⌈0.76555·n⌉ + 保护位 生成工作精度计划"""
        if n < 1:
            raise DomainError(f"n={n} 必须为正整数")
        if target_digits < 1:
            raise DomainError(f"目标精度 {target_digits} 必须为正整数")

        guard = self.guard_digits(n, target_digits)
        working = math.ceil(PEAK_RATIO * n) + guard
        plan = PrecisionPlan(
            n=n,
            target_digits=target_digits,
            working_digits=working,
            guard_digits=guard,
            peak_ratio=PEAK_RATIO,
            profile=self.profile(n),
        )
        logger.debug(f"精度计划 n={n}: 工作精度 {working} 位, 保护位 {guard} 位")
        return plan

    def with_working_digits(self, plan: PrecisionPlan, digits: int) -> PrecisionPlan:
        """只允许向上覆盖工作精度"""
        if digits < plan.working_digits:
            raise PrecisionShortfallError(
                f"覆盖的工作精度 {digits} 低于计划要求 {plan.working_digits} (n={plan.n})"
            )
        return plan.model_copy(update={"working_digits": digits})

    def bumped(self, plan: PrecisionPlan, factor: float = 1.25) -> PrecisionPlan:
        return self.with_working_digits(plan, math.ceil(plan.working_digits * factor))

    def measured_profile(self, n: int, table: XiLogTable, digits: int = 30) -> Dict[int, float]:
        """实际求和项的 log₁₀|Aₙₘ log 2ξ(2m)|, 对应 ϖ 曲线的有限 n 版本"""
        row = coefficient_service.coefficient_row(n)
        profile = {}
        with mp.workdps(digits):
            for m in range(1, n + 1):
                term = abs(coefficient_service.to_mpf(row[m]) * table[m])
                profile[m] = float(mp.log10(term))
        return profile

    def stability(self, compute: Callable[[int], mpf], plan: PrecisionPlan, factor: float = 1.25) -> mpf:
        """以计划精度和提高后的精度各算一次, 返回两者之差的绝对值"""
        high = self.bumped(plan, factor)
        base_value = compute(plan.working_digits)
        high_value = compute(high.working_digits)
        with mp.workdps(high.working_digits):
            diff = abs(high_value - base_value)
        logger.debug(f"精度稳定性 n={plan.n}: 差值 {mp.nstr(diff, 5)}")
        return diff


# 创建单例实例
precision_service = PrecisionService()
