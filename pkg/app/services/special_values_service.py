import logging
import math
import time
from functools import lru_cache
from math import factorial
from typing import Dict, Optional, Tuple

from mpmath import mp, mpc, mpf

from app.config import settings
from app.db.xilog_cache import XiLogCache
from app.exceptions import DomainError
from app.schemas.special_values import XiLogTable, XiRoute
from app.services.coefficient_service import double_factorial
from app.services.worker_pool import parallel_map

logger = logging.getLogger(__name__)

# 内部计算比请求精度多保留的位数
EXTRA_DIGITS = 10


class SpecialValuesService:
    """log 2ξ(2m) 及相关特殊值 (ζ(2m), log Γ, 双阶乘, log|B₂ₘ|) 的任意精度计算"""

    def __init__(self, series_max_terms: int = settings.ZETA_SERIES_MAX_TERMS,
                 bernoulli_max_m: int = settings.BERNOULLI_ROUTE_MAX_M):
        self.series_max_terms = series_max_terms
        self.bernoulli_max_m = bernoulli_max_m

    @staticmethod
    def series_terms(m: int, digits: int) -> Optional[int]:
        """
        Dirichlet 级数所需项数 K, 满足尾项界 K^(1−2m)/(2m−1) < 10^(−digits);
        K 超过 10^308 时返回 None
        """
        exponent = (digits - math.log10(2 * m - 1)) / (2 * m - 1)
        if exponent > 308:
            return None
        return max(1, math.floor(10 ** exponent) + 1)

    @lru_cache(maxsize=4096)
    def zeta_even(self, m: int, digits: int) -> mpf:
        """ζ(2m), 绝对误差 < 10^(−digits)"""
        if m < 1:
            raise DomainError(f"zeta_even 需要 m >= 1, 收到 m={m}")

        with mp.workdps(digits + EXTRA_DIGITS):
            k_max = self.series_terms(m, digits)
            if k_max is not None and k_max <= self.series_max_terms:
                # 级数按 k 递增求和, k^(−2m) 由高精度倒数的整数幂得到
                value = mp.fsum((mpf(1) / k) ** (2 * m) for k in range(1, k_max + 1))
            else:
                # 项数超出预算 (小 m, 高精度), 改用 mpmath 的偶整数精确路径
                logger.debug(f"ζ({2 * m}) 级数需要 {k_max} 项, 改用 mpmath.zeta")
                value = mp.zeta(2 * m)
            return +value

    def log_2xi_even(self, m: int, digits: int, route: XiRoute = XiRoute.GAMMA_ZETA) -> mpf:
        """log 2ξ(2m), 2ξ(2m) = 2m(2m−1) π^(−m) Γ(m) ζ(2m); m = 0 时恰为 0"""
        if m < 0:
            raise DomainError(f"log_2xi_even 需要 m >= 0, 收到 m={m}")
        if m == 0:
            return mpf(0)

        route = XiRoute(route)
        with mp.workdps(digits + EXTRA_DIGITS):
            if route == XiRoute.BERNOULLI:
                value = self._log_2xi_bernoulli(m)
            else:
                # Γ(m) = (m−1)! 取精确整数, 只取一次对数
                prefactor = 2 * m * (2 * m - 1) * factorial(m - 1)
                value = mp.log(prefactor) - m * mp.log(mp.pi) + mp.log(self.zeta_even(m, digits + EXTRA_DIGITS))
            return +value

    def _log_2xi_bernoulli(self, m: int) -> mpf:
        # 2ξ(2m) = |B₂ₘ| (2π)^m / |(2m−3)!!|, 仅用于小 m 的交叉校验
        if m > self.bernoulli_max_m:
            raise DomainError(f"bernoulli 路径只支持 m <= {self.bernoulli_max_m}, 收到 m={m}")
        p, q = mp.bernfrac(2 * m)
        exact = abs(p) / abs(double_factorial(2 * m - 3)) / q
        return mp.log(exact.numerator) - mp.log(exact.denominator) + m * mp.log(2 * mp.pi)

    def log_bernoulli_even(self, m: int, digits: int) -> mpf:
        """ln|B₂ₘ|, 由 |B₂ₘ| = 2 (2m)! ζ(2m)/(2π)^(2m) 得到"""
        if m < 1:
            raise DomainError(f"log_bernoulli_even 需要 m >= 1, 收到 m={m}")
        with mp.workdps(digits + EXTRA_DIGITS):
            value = (mp.log(2 * factorial(2 * m))
                     + mp.log(self.zeta_even(m, digits + EXTRA_DIGITS))
                     - 2 * m * mp.log(2 * mp.pi))
            return +value

    @staticmethod
    def log_gamma_half(m: int, digits: int) -> mpf:
        """ln Γ(m − ½), m >= 1"""
        if m < 1:
            raise DomainError(f"log_gamma_half 需要 m >= 1, 收到 m={m}")
        with mp.workdps(digits + EXTRA_DIGITS):
            return +mp.loggamma(mpf(m) - mpf(1) / 2)

    @staticmethod
    def completed_xi(x, digits: int) -> mpc:
        """2ξ(x) = x(x−1) π^(−x/2) Γ(x/2) ζ(x), 仅作诊断用途"""
        with mp.workdps(digits + EXTRA_DIGITS):
            x = mp.mpmathify(x)
            return +(x * (x - 1) * mp.power(mp.pi, -x / 2) * mp.gamma(x / 2) * mp.zeta(x))

    def functional_equation_defect(self, x, digits: int) -> mpf:
        """|2ξ(x) − 2ξ(1−x)|, 函数方程的数值抽查"""
        with mp.workdps(digits + EXTRA_DIGITS):
            x = mp.mpmathify(x)
            return +abs(self.completed_xi(x, digits) - self.completed_xi(1 - x, digits))

    def build_table(
            self,
            n_max: int,
            digits: int,
            route: XiRoute = XiRoute.GAMMA_ZETA,
            workers: int = 1,
            cache: Optional[XiLogCache] = None,
    ) -> XiLogTable:
        """构建 m = 1…n_max 的 log 2ξ(2m) 表, 先查缓存, 缺失项按 m 并行计算"""
        start_time = time.time()
        route = XiRoute(route)
        entries: Dict[int, mpf] = {}
        missing = []

        with mp.workdps(digits + EXTRA_DIGITS):
            for m in range(1, n_max + 1):
                hit = cache.lookup(m, digits) if cache is not None and route == XiRoute.GAMMA_ZETA else None
                if hit is None:
                    missing.append(m)
                    continue
                text, tag = hit
                with mp.workdps(tag + EXTRA_DIGITS):
                    entries[m] = mpf(text)

        if missing:
            logger.info(f"计算 {len(missing)} 个 log 2ξ(2m) 值 (精度 {digits} 位, 路径 {route.value})")
            results = parallel_map(_log_2xi_worker, [(m, digits, route.value) for m in missing], workers)
            with mp.workdps(digits + EXTRA_DIGITS):
                for m, text in results:
                    entries[m] = mpf(text)
                    if cache is not None and route == XiRoute.GAMMA_ZETA:
                        cache.store(m, digits, text)

        process_time = time.time() - start_time
        logger.info(
            f"log 2ξ 表构建完成 n_max={n_max} 精度={digits} "
            f"缓存命中={n_max - len(missing)} 耗时: {process_time:.3f}s"
        )
        return XiLogTable(entries=entries, digits=digits, route=route)

    def table_from_strings(self, strings: Dict[int, str], digits: int,
                           route: XiRoute = XiRoute.GAMMA_ZETA) -> XiLogTable:
        with mp.workdps(digits + EXTRA_DIGITS):
            entries = {m: mpf(text) for m, text in strings.items()}
        return XiLogTable(entries=entries, digits=digits, route=route)

    def cross_check_routes(self, n_max: int, digits: int) -> Tuple[int, mpf]:
        """两条路径的最大差异, 返回 (m, |差|), 只检查 m <= bernoulli_max_m"""
        worst_m, worst = 0, mpf(0)
        with mp.workdps(digits + EXTRA_DIGITS):
            for m in range(1, min(n_max, self.bernoulli_max_m) + 1):
                diff = abs(self.log_2xi_even(m, digits, XiRoute.GAMMA_ZETA)
                           - self.log_2xi_even(m, digits, XiRoute.BERNOULLI))
                if diff > worst:
                    worst_m, worst = m, diff
        return worst_m, worst

    def bernoulli_log_table(self, n_max: int, digits: int, workers: int = 1) -> Dict[int, mpf]:
        """m → ln|B₂ₘ|, 供 u 形式与 V 形式使用"""
        results = parallel_map(_log_bernoulli_worker, [(m, digits) for m in range(1, n_max + 1)], workers)
        with mp.workdps(digits + EXTRA_DIGITS):
            return {m: mpf(text) for m, text in results}


def _log_2xi_worker(args: Tuple[int, int, str]) -> Tuple[int, str]:
    m, digits, route = args
    value = special_values_service.log_2xi_even(m, digits, XiRoute(route))
    return m, mp.nstr(value, digits + EXTRA_DIGITS)


def _log_bernoulli_worker(args: Tuple[int, int]) -> Tuple[int, str]:
    m, digits = args
    value = special_values_service.log_bernoulli_even(m, digits)
    return m, mp.nstr(value, digits + EXTRA_DIGITS)


# 创建单例实例
special_values_service = SpecialValuesService()
