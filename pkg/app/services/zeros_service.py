import logging
import math
import time
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from mpmath import mp, mpc, mpf

from app.exceptions import DomainError, InputFileError, ZeroTableError
from app.schemas.coefficients import CoefficientRow
from app.schemas.zeros import FnEvaluation, ZeroSumResult, ZeroTable
from app.services.coefficient_service import coefficient_service
from app.services.precision_service import precision_service
from app.services.worker_pool import parallel_map

logger = logging.getLogger(__name__)

# 第一个黎曼零点的纵坐标, 空表时作为尾项估计的起点
FIRST_ZERO_ORDINATE = 14.134725141734693

# 远场展开的截断阶数
FAR_FIELD_ORDER = 60

# float64 路径的精度上限
FLOAT_DIGITS = 15


def _log10_abs(q: Fraction) -> float:
    # 大有理数的 log₁₀|q|, 不经过 float 转换以免溢出
    if q == 0:
        return -math.inf
    return math.log10(abs(q.numerator)) - math.log10(q.denominator)


def _is_on_cut(x: mpc, n: int) -> bool:
    return x.imag == 0 and 0 <= x.real <= 2 * n


class ZerosService:
    """零点数据读取, Fₙ 求值及其渐近形式, 零点求和表示与 Keiper 参考序列"""

    @staticmethod
    def load_zeros(path: str) -> ZeroTable:
        """每行一个十进制纵坐标, 允许空行与 # 注释"""
        file_path = Path(path)
        if not file_path.is_file():
            raise InputFileError(f"零点文件不存在: {path}")

        start_time = time.time()
        ordinates: List[float] = []
        with open(file_path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                try:
                    gamma = float(text)
                except ValueError:
                    raise ZeroTableError(f"无法解析的纵坐标 {text!r}", line_no)
                if not math.isfinite(gamma) or gamma <= 0:
                    raise ZeroTableError(f"纵坐标必须为正数, 收到 {text}", line_no)
                if ordinates and gamma <= ordinates[-1]:
                    raise ZeroTableError(f"纵坐标未严格递增: {text} <= {ordinates[-1]!r}", line_no)
                ordinates.append(gamma)

        table = ZeroTable(ordinates=ordinates, source=str(file_path))
        logger.info(f"读取零点 {table.count} 个, 来源 {file_path}, 耗时: {time.time() - start_time:.3f}s")
        return table

    @staticmethod
    def working_digits_at(x, n: int, digits: int) -> int:
        """在 x 处求 Fₙ 所需的工作精度: 系数消去量 + |x| 带来的相对精度损失"""
        extra = math.ceil(math.log10(1 + abs(complex(x))))
        return precision_service.plan_for(n, digits + extra).working_digits

    @staticmethod
    def _f_n_logs(x: mpc, row: CoefficientRow) -> mpc:
        # 在当前工作精度下按对数形式求 Fₙ, 调用方负责割线检查
        n = row.n
        a0 = coefficient_service.to_mpf(row.a0)
        # 负实轴: 各项 iπ 之和由第一个求和恒等式抵消, 只保留实对数
        negative_axis = x.imag == 0 and x.real < 0

        def log(z):
            return mp.log(abs(z)) if negative_axis else mp.log(z)

        total = -log(x - 1) / a0
        for m in range(n + 1):
            term = coefficient_service.to_mpf(row[m]) * log(x - 2 * m)
            total = total - term if m % 2 else total + term
        return total if n % 2 == 0 else -total

    def f_n(self, x, n: int, digits: int = 15) -> mpc:
        """Fₙ(x) = (−1)ⁿ[−(1/Aₙ₀) log(x−1) + Σₘ (−1)^m Aₙₘ log(x−2m)], 割线 [0, 2n] 之外单值"""
        working = self.working_digits_at(x, n, digits)
        row = coefficient_service.coefficient_row(n)
        with mp.workdps(working):
            x = mpc(x)
            if _is_on_cut(x, n):
                raise DomainError(f"x={mp.nstr(x, 10)} 位于 F_{n} 的割线 [0, {2 * n}] 上")
            return +mpc(self._f_n_logs(x, row))

    def evaluate_f_n(self, x, n: int, digits: int = 15) -> FnEvaluation:
        value = self.f_n(x, n, digits)
        x = mpc(x)
        if x.imag > 0:
            note = "上半平面, 主支对数"
        elif x.imag < 0:
            note = "下半平面, 主支对数"
        elif x.real > 2 * n:
            note = f"实轴 x > {2 * n}, 实对数"
        else:
            note = "负实轴, 取绝对值的实对数"
        return FnEvaluation(n=n, x=x, value=value, branch_note=note)

    @staticmethod
    def g_factor(x, digits: int = 30) -> mpc:
        """g(x) = √π 2^(x−1)/(sin(πx/2) Γ(x)), 极点为正偶数"""
        with mp.workdps(digits + 10):
            x = mp.mpmathify(x)
            if mp.im(x) == 0 and mp.re(x) == mp.nint(mp.re(x)) and int(mp.re(x)) % 2 == 0:
                if mp.re(x) > 0:
                    raise DomainError(f"g 在正偶数 x={int(mp.re(x))} 处有极点")
                # 非正偶数处为可去奇点, g = Γ(1−x/2)/Γ((x+1)/2)
                return +(mp.gamma(1 - x / 2) * mp.rgamma((x + 1) / 2))
            return +(mp.sqrt(mp.pi) * mp.power(2, x - 1) * mp.rgamma(x) / mp.sin(mp.pi * x / 2))

    @staticmethod
    def g_n_product(x, n: int, digits: int = 30) -> mpc:
        """Gₙ(x) = ∏ₘ₌₁ⁿ (x+2m−1)/(x−2m)"""
        with mp.workdps(digits + 10):
            x = mp.mpmathify(x)
            result = mpf(1)
            for m in range(1, n + 1):
                if x == 2 * m:
                    raise DomainError(f"G_{n} 在 x={2 * m} 处有极点")
                result *= (x + 2 * m - 1) / (x - 2 * m)
            return +result

    def g_n_gamma_form(self, x, n: int, digits: int = 30) -> mpc:
        """Gₙ(x) = g(x) (−1)ⁿ Γ((x+1)/2 + n)/Γ(1 − x/2 + n)"""
        g = self.g_factor(x, digits)
        with mp.workdps(digits + 10):
            x = mp.mpmathify(x)
            value = g * mp.gamma((x + 1) / 2 + n) * mp.rgamma(1 - x / 2 + n)
            return +(value if n % 2 == 0 else -value)

    def f_n_quadrature(self, x, n: int, digits: int = 20) -> mpc:
        """∫_∞^x Gₙ(y)/(y(y−1)) dy 沿竖直路径 y = x ± is 的数值积分, 作为 f_n 的独立参照"""
        with mp.workdps(digits + 10):
            x = mpc(x)
            if _is_on_cut(x, n):
                raise DomainError(f"x={mp.nstr(x, 10)} 位于 F_{n} 的割线 [0, {2 * n}] 上")
            direction = 1 if x.imag >= 0 else -1

            def integrand(s):
                y = x + direction * 1j * s
                return self.g_n_product(y, n, digits) / (y * (y - 1))

            scale = max(1, abs(x), 2 * n)
            integral = mp.quad(integrand, [0, scale, 10 * scale, 100 * scale, mp.inf])
            return +(-direction * 1j * integral)

    @staticmethod
    def far_field_bound_log10(n: int) -> float:
        """log₁₀ B, B = |1/Aₙ₀| + Σₘ Aₙₘ, 满足 |a_j| <= B (2n)^j"""
        row = coefficient_service.coefficient_row(n)
        bound = abs(1 / row.a0) + sum(row.values[1:])
        return _log10_abs(bound)

    @lru_cache(maxsize=64)
    def far_field_radius(self, n: int, digits: int, order: int = FAR_FIELD_ORDER) -> float:
        """
        |x| 超过该半径时用远场级数代替对数形式: 截断误差 B q^(J+1)/(1−q) < 10^(−digits−2) (q = 2n/|x| <= ½),
        且每项 |a_j x^(−j)| <= 1 (float64 求值不损失有效位)
        """
        log_b = self.far_field_bound_log10(n)
        log_q = min(math.log10(0.5), (-digits - 2 - log_b - math.log10(2)) / (order + 1))
        log_radius = math.log10(2 * n) - log_q
        for j, a in enumerate(coefficient_service.moment_coefficients(n, order), start=1):
            log_radius = max(log_radius, _log10_abs(a) / j)
        if log_radius > 300:
            return math.inf
        return 10 ** log_radius

    def f_n_far_field(self, x, n: int, digits: int = 15, order: int = FAR_FIELD_ORDER) -> mpc:
        """Fₙ(x) = Σ_{j<=J} a_j x^(−j), 截断误差超过 10^(−digits) 时报错"""
        x = mpc(x)
        modulus = float(abs(x))
        q = 2 * n / modulus if modulus > 0 else math.inf
        if q >= 1:
            raise DomainError(f"|x|={modulus:g} 不大于 2n={2 * n}, 远场级数不收敛")
        log_tail = self.far_field_bound_log10(n) + (order + 1) * math.log10(q) - math.log10(1 - q)
        if log_tail > -digits:
            raise DomainError(f"远场级数在 |x|={modulus:g} 处截断误差约 1e{log_tail:.1f}, 超过 1e-{digits}")

        coefficients = coefficient_service.moment_coefficients(n, order)
        log_max_term = max(_log10_abs(a) - j * math.log10(modulus) for j, a in enumerate(coefficients, start=1))
        with mp.workdps(digits + max(0, math.ceil(log_max_term)) + 10):
            inv = 1 / mpc(x)
            value = mpf(0)
            for a in reversed(coefficients):
                value = (value + coefficient_service.to_mpf(a)) * inv
            return +value

    def f_n_asymptotic(self, rho, n: int, digits: int = 30) -> mpc:
        """Fₙ(ρ) ~ g(ρ)/(ρ(ρ−1)) · (−1)ⁿ n^(ρ−½)/log n"""
        if n < 2:
            raise DomainError(f"渐近形式需要 n >= 2, 收到 n={n}")
        with mp.workdps(digits + 10):
            rho = mp.mpmathify(rho)
            if mp.im(rho) == 0 and mp.re(rho) == mp.nint(mp.re(rho)) and int(mp.re(rho)) % 2 == 0:
                raise DomainError(f"ρ={mp.nstr(rho, 10)} 为 g 的极点 (偶数)")
            if rho == 1:
                raise DomainError("ρ=1 处 ρ(ρ−1) 为零")
            g = self.g_factor(rho, digits)
            value = g / (rho * (rho - 1)) * mp.power(n, rho - mpf(1) / 2) / mp.log(n)
            return +(value if n % 2 == 0 else -value)

    @staticmethod
    def modulus_estimate(rho, n) -> float:
        """|Fₙ(ρ)| ≈ (1/(|Im ρ|² ln n)) (2n/|Im ρ|)^(Re ρ − ½), 对数空间计算"""
        rho = complex(rho)
        height = abs(rho.imag)
        if height == 0:
            raise DomainError("模估计需要 Im ρ ≠ 0")
        log_n = math.log(n)
        t = rho.real - 0.5
        log_value = -2 * math.log(height) - math.log(log_n) + t * (math.log(2 * n) - math.log(height))
        return math.exp(log_value)

    def pair_constant(self, n: int) -> Fraction:
        """κₙ = −1 − 2a₂, 每对零点的贡献 2 Re Fₙ(½+iγ) ≈ κₙ/γ²"""
        a2 = coefficient_service.moment_coefficients(n, 2)[1]
        return -1 - 2 * a2

    @staticmethod
    def _tail(kappa: float, last_ordinate: float) -> float:
        # ∫_Γ^∞ κ/γ² dN(γ), dN ≈ ln(γ/2π) dγ/2π, 再乘以 2 作为安全系数
        return 2 * abs(kappa) * (math.log(last_ordinate / (2 * math.pi)) + 1) / (2 * math.pi * last_ordinate)

    def tail_bound(self, n: int, table: ZeroTable, pairs: int) -> float:
        return self._tail(float(self.pair_constant(n)), self._last_ordinate(table, pairs))

    def keiper_tail_bound(self, table: ZeroTable, pairs: int, n: int = 1) -> float:
        """λₙᴷ 求和的尾项估计, 每对贡献 ≈ n/γ²"""
        return self._tail(float(n), self._last_ordinate(table, pairs))

    @staticmethod
    def _last_ordinate(table: ZeroTable, pairs: int) -> float:
        if pairs > 0:
            return table.ordinates[pairs - 1]
        return table.ordinates[0] if table.count else FIRST_ZERO_ORDINATE

    def _far_contributions(self, n: int, ordinates: np.ndarray, digits: int) -> List[mpf]:
        coefficients = coefficient_service.moment_coefficients(n, FAR_FIELD_ORDER)
        logs = [_log10_abs(a) for a in coefficients]
        if digits <= FLOAT_DIGITS and max(logs) < 300:
            inv = 1 / (0.5 + 1j * ordinates)
            value = np.zeros_like(inv)
            for a in reversed(coefficients):
                value = (value + float(a)) * inv
            return [mpf(v) for v in 2 * value.real]
        return [2 * mp.re(self.f_n_far_field(mpc(0.5, gamma), n, digits)) for gamma in ordinates]

    def zero_sum_lambda(self, n: int, table: ZeroTable, pairs: int, digits: int = 15,
                        workers: int = 1) -> Tuple[mpf, float]:
        """Σₖ<=pairs 2·Re Fₙ(½ + iγₖ), 按 γ 递增的固定顺序归约; 返回 (值, 启发式尾项界)"""
        if pairs < 0:
            raise DomainError(f"pairs={pairs} 不能为负")
        if pairs > table.count:
            raise ZeroTableError(f"需要 {pairs} 个零点, 零点表只有 {table.count} 个")

        start_time = time.time()
        tail = self.tail_bound(n, table, pairs)
        if pairs == 0:
            return mpf(0), tail

        ordinates = np.asarray(table.ordinates[:pairs], dtype=float)
        radius = self.far_field_radius(n, digits)
        split = int(np.searchsorted(ordinates, radius, side="right"))
        near, far = ordinates[:split], ordinates[split:]

        contributions: List[mpf] = []
        if len(near):
            working = self.working_digits_at(complex(0.5, near[-1]), n, digits)
            chunks = [(n, working, near[k:k + 256].tolist()) for k in range(0, len(near), 256)]
            for chunk in parallel_map(_near_chunk_worker, chunks, workers):
                with mp.workdps(working):
                    contributions.extend(mpf(text) for text in chunk)
        if len(far):
            contributions.extend(self._far_contributions(n, far, digits))

        with mp.workdps(max(digits, FLOAT_DIGITS) + 10):
            value = mp.fsum(contributions)
        logger.info(
            f"零点求和 n={n} pairs={pairs}: 近场 {len(near)} 个, 远场 {len(far)} 个, "
            f"尾项界 {tail:.3e}, 耗时: {time.time() - start_time:.3f}s"
        )
        return +value, tail

    def zero_sum(self, n: int, table: ZeroTable, pairs: int, digits: int = 15, workers: int = 1) -> ZeroSumResult:
        value, tail = self.zero_sum_lambda(n, table, pairs, digits, workers)
        return ZeroSumResult(n=n, pairs=pairs, value=value, tail_bound=tail)

    def keiper_lambda(self, n: int, table: ZeroTable, pairs: int) -> float:
        """λₙᴷ = n⁻¹ Σ⟨ρ,1−ρ⟩ [1 − (1−1/ρ)ⁿ] 的截断和, 每对取 2·Re"""
        if pairs > table.count:
            raise ZeroTableError(f"需要 {pairs} 个零点, 零点表只有 {table.count} 个")
        if pairs <= 0:
            return 0.0
        rho = 0.5 + 1j * np.asarray(table.ordinates[:pairs], dtype=float)
        # 1 − (1−1/ρ)ⁿ = −expm1(z), z = n·log1p(−1/ρ); 实部按实函数稳定展开
        z = n * np.log1p(-1 / rho)
        real_expm1 = np.expm1(z.real) * np.cos(z.imag) - 2 * np.sin(z.imag / 2) ** 2
        contributions = -2 * real_expm1 / n
        return math.fsum(contributions.tolist())

    @staticmethod
    def keiper_li_lambda(keiper_value: float, n: int) -> float:
        """λₙᴸ = n·λₙᴷ"""
        return n * keiper_value

    def decay_constant(self, n: int, digits: int = 15, fit_at: float = 100.0) -> float:
        """在实轴 x = fit_at 处拟合 K = |Fₙ(x) + 1/x|·x²"""
        if fit_at <= 2 * n:
            raise DomainError(f"拟合点 {fit_at} 必须大于 2n={2 * n}")
        value = self.f_n(fit_at, n, digits)
        with mp.workdps(self.working_digits_at(fit_at, n, digits)):
            return float(abs(value + 1 / mpf(fit_at)) * mpf(fit_at) ** 2)


def _near_chunk_worker(args: Tuple[int, int, List[float]]) -> List[str]:
    n, working, ordinates = args
    row = coefficient_service.coefficient_row(n)
    results = []
    with mp.workdps(working):
        for gamma in ordinates:
            value = zeros_service._f_n_logs(mpc(0.5, gamma), row)
            results.append(mp.nstr(2 * value.real, working))
    return results


# 创建单例实例
zeros_service = ZerosService()
