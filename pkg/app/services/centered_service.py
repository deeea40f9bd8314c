import logging
import time
from typing import Dict, Iterable, List, Optional, Tuple

from mpmath import mp, mpf
from pydantic import ValidationError

from app.config import settings
from app.db.xilog_cache import XiLogCache, get_cache
from app.exceptions import DomainError, PrecisionShortfallError
from app.schemas.centered import CenteredConfig, CenteredRow
from app.schemas.special_values import XiLogTable
from app.services.lambda_service import lambda_service
from app.services.precision_service import precision_service
from app.services.special_values_service import special_values_service
from app.services.worker_pool import parallel_map

logger = logging.getLogger(__name__)

# 子进程内共享的只读 log 2ξ 表
_worker_state: Dict[str, object] = {}


class CenteredService:
    """以 x = ½ 为基点的中心化变体 Λ⁰ₙ(w̃)"""

    @staticmethod
    def build_config(w_tilde: float, n: int, digits: int) -> CenteredConfig:
        """rₘ = √(1+(4m−1)²/w̃), m = 0…n"""
        if not w_tilde > 0:
            raise DomainError(f"w̃={w_tilde} 必须为正数")
        with mp.workdps(digits + 10):
            w = mpf(w_tilde)
            radii = [mp.sqrt(1 + mpf(4 * m - 1) ** 2 / w) for m in range(n + 1)]
        try:
            return CenteredConfig(w_tilde=w_tilde, n=n, digits=digits, radii=radii)
        except ValidationError as e:
            raise DomainError(f"中心化参数无效 (w̃={w_tilde}, n={n}): {e.errors()[0]['msg']}")

    def _ensure_config(self, n: int, cfg: CenteredConfig, digits: int) -> CenteredConfig:
        if cfg.n >= n and cfg.digits >= digits:
            return cfg
        return self.build_config(cfg.w_tilde, max(n, cfg.n), digits)

    @staticmethod
    def centered_coefficients(n: int, cfg: CenteredConfig) -> List[mpf]:
        """
        log 2ξ(2m) 的权重, m = 1…n:
        [2/(rₘ+1)²] · ∏ₖ₌₀ⁿ (rₘ+rₖ) / ∏ₖ≠ₘ (rₘ−rₖ)
        """
        if cfg.n < n:
            raise DomainError(f"配置只含 r₀…r_{cfg.n}, 需要到 r_{n}")
        r = cfg.radii[:n + 1]
        weights = []
        for m in range(1, n + 1):
            numerator = mpf(1)
            denominator = mpf(1)
            for k in range(n + 1):
                numerator *= r[m] + r[k]
                if k != m:
                    gap = r[m] - r[k]
                    if gap == 0:
                        raise DomainError(f"r_{m} 与 r_{k} 重合")
                    denominator *= gap
            weights.append(2 / (r[m] + 1) ** 2 * numerator / denominator)
        return weights

    @staticmethod
    def centered_log_magnitudes(n: int, cfg: CenteredConfig) -> List[mpf]:
        """权重模的自然对数, 在对数空间求和, 用于核对直接乘积"""
        r = cfg.radii[:n + 1]
        logs = []
        for m in range(1, n + 1):
            total = mp.log(2) - 2 * mp.log(r[m] + 1)
            total += mp.fsum(mp.log(r[m] + r[k]) for k in range(n + 1))
            total -= mp.fsum(mp.log(abs(r[m] - r[k])) for k in range(n + 1) if k != m)
            logs.append(total)
        return logs

    def _evaluate(self, n: int, cfg: CenteredConfig, table: XiLogTable, digits: int) -> mpf:
        with mp.workdps(digits):
            cfg = self._ensure_config(n, cfg, digits)
            weights = self.centered_coefficients(n, cfg)
            return +mp.fsum(w * table[m] for m, w in enumerate(weights, start=1))

    def centered_lambda(
            self,
            n: int,
            cfg: CenteredConfig,
            table: Optional[XiLogTable] = None,
            target_digits: int = settings.DEFAULT_TARGET_DIGITS,
            validate: bool = True,
            cache: Optional[XiLogCache] = None,
    ) -> mpf:
        """
        Λ⁰ₙ(w̃) = Σₘ₌₁ⁿ 权重ₘ · log 2ξ(2m)
        工作精度沿用 Λₙ 的 0.766·n 计划; validate 时以 1.25 倍精度复算, 差值超过 10^(−target) 报错
        """
        plan = precision_service.plan_for(n, target_digits)
        needed = precision_service.bumped(plan).working_digits if validate else plan.working_digits
        if table is None:
            table = special_values_service.build_table(n, needed, cache=cache if cache is not None else get_cache())
        if not table.covers(n):
            raise PrecisionShortfallError(f"log 2ξ 表只覆盖到 m={table.n_max}, 计算 Λ⁰_{n} 需要 m <= {n}")
        if table.digits < needed:
            raise PrecisionShortfallError(f"log 2ξ 表精度 {table.digits} 位, 低于所需 {needed} 位")

        start_time = time.time()
        value = self._evaluate(n, cfg, table, plan.working_digits)
        if validate:
            high = self._evaluate(n, cfg, table, needed)
            with mp.workdps(needed):
                diff = abs(high - value)
                if diff >= mpf(10) ** (-target_digits):
                    raise PrecisionShortfallError(
                        f"Λ⁰_{n} 在 {plan.working_digits} 位与 {needed} 位精度下相差 {mp.nstr(diff, 5)}, "
                        f"未达到 10^-{target_digits}"
                    )
        logger.debug(f"Λ⁰_{n}(w̃={cfg.w_tilde}) 完成, 耗时: {time.time() - start_time:.3f}s")
        return value

    @staticmethod
    def remainder(n: int, w_tilde: float, value: mpf) -> mpf:
        """Λ⁰ₙ − √w̃ (log n + C)"""
        return value - mp.sqrt(w_tilde) * (mp.log(n) + lambda_service.asymptotic_constant())

    def centered_row(self, n: int, cfg: CenteredConfig, table: XiLogTable, target_digits: int,
                     validate: bool = False) -> CenteredRow:
        value = self.centered_lambda(n, cfg, table, target_digits, validate)
        with mp.workdps(precision_service.plan_for(n, target_digits).working_digits):
            return CenteredRow(n=n, value=value, remainder=+self.remainder(n, cfg.w_tilde, value))

    def centered_scan(
            self,
            n_values: Iterable[int],
            w_tilde: float = settings.CENTERED_W_DEFAULT,
            target_digits: int = settings.DEFAULT_TARGET_DIGITS,
            workers: int = 1,
            validate: bool = False,
            cache: Optional[XiLogCache] = None,
    ) -> List[CenteredRow]:
        """对给定 n 逐个计算 (n, Λ⁰ₙ, 余项), 共用一张表"""
        n_values = sorted(set(n_values))
        if not n_values:
            return []
        start_time = time.time()
        n_max = n_values[-1]
        top_plan = precision_service.plan_for(n_max, target_digits)
        digits = precision_service.bumped(top_plan).working_digits if validate else top_plan.working_digits
        table = special_values_service.build_table(
            n_max, digits, workers=workers, cache=cache if cache is not None else get_cache()
        )
        cfg = self.build_config(w_tilde, n_max, digits)

        if workers <= 1:
            rows = [self.centered_row(n, cfg, table, target_digits, validate) for n in n_values]
        else:
            results = parallel_map(
                _centered_worker,
                [(n, w_tilde, target_digits, validate) for n in n_values],
                workers,
                initializer=_init_centered_worker,
                initargs=(table.to_strings(), digits),
            )
            rows = []
            for n, value, remainder, working in results:
                with mp.workdps(working):
                    rows.append(CenteredRow(n=n, value=mpf(value), remainder=mpf(remainder)))

        logger.info(f"中心化扫描 w̃={w_tilde} 共 {len(rows)} 项, 耗时: {time.time() - start_time:.3f}s")
        return rows


def _init_centered_worker(strings: Dict[int, str], digits: int):
    _worker_state["table"] = special_values_service.table_from_strings(strings, digits)


def _centered_worker(args: Tuple[int, float, int, bool]) -> Tuple[int, str, str, int]:
    n, w_tilde, target_digits, validate = args
    table = _worker_state["table"]
    working = precision_service.plan_for(n, target_digits).working_digits
    cfg = centered_service.build_config(w_tilde, n, working)
    row = centered_service.centered_row(n, cfg, table, target_digits, validate)
    return n, mp.nstr(row.value, working), mp.nstr(row.remainder, working), working


# 创建单例实例
centered_service = CenteredService()
