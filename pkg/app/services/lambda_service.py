import logging
import time
from typing import Dict, List, Mapping, Optional, Tuple

from mpmath import mp, mpf

from app.db.xilog_cache import XiLogCache, get_cache
from app.exceptions import DomainError, PrecisionShortfallError
from app.schemas.lambda_record import LambdaForm, LambdaRecord
from app.schemas.precision import PrecisionPlan
from app.schemas.special_values import XiLogTable, XiRoute
from app.services.coefficient_service import coefficient_service
from app.services.precision_service import precision_service
from app.services.special_values_service import EXTRA_DIGITS, special_values_service
from app.services.worker_pool import parallel_map

logger = logging.getLogger(__name__)

# 子进程内的只读输入, 由 _init_scan_worker 填充
_worker_state: Dict[str, object] = {}


class LambdaService:
    """Λₙ 的三种闭式 (直接形式, uₙ 形式, V 形式) 及余项 δΛₙ"""

    @staticmethod
    def asymptotic_constant() -> mpf:
        """C = ½(γ − ln π − 1), 按当前工作精度计算"""
        return (mp.euler - mp.log(mp.pi) - 1) / 2

    def keiper_constant(self) -> mpf:
        """c = C − ½ ln 2, Keiper 序列 λₙ ~ ½ log n + c 中的常数"""
        return self.asymptotic_constant() - mp.log(2) / 2

    @staticmethod
    def _check_table(n: int, plan: PrecisionPlan, table: XiLogTable):
        if not table.covers(n):
            raise PrecisionShortfallError(f"log 2ξ 表只覆盖到 m={table.n_max}, 计算 Λ_{n} 需要 m <= {n}")
        if table.digits < plan.working_digits:
            raise PrecisionShortfallError(
                f"log 2ξ 表精度 {table.digits} 位, 低于 Λ_{n} 的工作精度 {plan.working_digits} 位"
            )

    @staticmethod
    def _check_bernoulli(n: int, log_bernoulli: Mapping[int, mpf]):
        missing = [m for m in range(1, n + 1) if m not in log_bernoulli]
        if missing:
            raise PrecisionShortfallError(f"ln|B₂ₘ| 输入缺少 m={missing[0]} (共缺 {len(missing)} 项)")

    def _record(self, n: int, value: mpf, form: LambdaForm, plan: PrecisionPlan, start_time: float) -> LambdaRecord:
        delta = value - (mp.log(n) + self.asymptotic_constant())
        elapsed = time.time() - start_time
        logger.debug(f"Λ_{n} ({form.value}) 完成, 工作精度 {plan.working_digits} 位, 耗时: {elapsed:.3f}s")
        return LambdaRecord(n=n, value=+value, delta=+delta, form=form,
                            digits_used=plan.working_digits, elapsed=elapsed)

    def lambda_direct(self, n: int, plan: PrecisionPlan, table: XiLogTable) -> LambdaRecord:
        """Λₙ = (−1)ⁿ Σₘ₌₁ⁿ (−1)^m Aₙₘ log 2ξ(2m), 按 m 递增求和"""
        start_time = time.time()
        self._check_table(n, plan, table)
        row = coefficient_service.coefficient_row(n)

        with mp.workdps(plan.working_digits):
            total = mpf(0)
            for m in range(1, n + 1):
                term = coefficient_service.to_mpf(row[m]) * table[m]
                total = total - term if m % 2 else total + term
            value = total if n % 2 == 0 else -total
            return self._record(n, value, LambdaForm.DIRECT, plan, start_time)

    def lambda_u_form(self, n: int, plan: PrecisionPlan, log_bernoulli: Mapping[int, mpf]) -> LambdaRecord:
        """Λₙ = ½ log 2π + uₙ, uₙ = (−1)ⁿ[Σ (−1)^m Aₙₘ log(|B₂ₘ|/(2m−3)!!) + log 2π/(2Aₙ₀)]"""
        start_time = time.time()
        self._check_bernoulli(n, log_bernoulli)
        row = coefficient_service.coefficient_row(n)

        with mp.workdps(plan.working_digits):
            log_2pi = mp.log(2 * mp.pi)
            total = mpf(0)
            # (2m−3)!! 逐项累乘, m = 1 时为 (−1)!! = 1
            odd_factorial = 1
            for m in range(1, n + 1):
                if m >= 2:
                    odd_factorial *= 2 * m - 3
                term = coefficient_service.to_mpf(row[m]) * (log_bernoulli[m] - mp.log(odd_factorial))
                total = total - term if m % 2 else total + term
            total += log_2pi / (2 * coefficient_service.to_mpf(row.a0))
            u_n = total if n % 2 == 0 else -total
            return self._record(n, log_2pi / 2 + u_n, LambdaForm.U_FORM, plan, start_time)

    def lambda_v_form(self, n: int, plan: PrecisionPlan, log_bernoulli: Mapping[int, mpf]) -> LambdaRecord:
        """
        Λₙ = ½ log π + (−1)ⁿ[Σ (−1)^m Aₙₘ log(|B₂ₘ|/Γ(m−½))
                             + (1/Aₙ₀ − Aₙ₀) log 2 + (1/Aₙ₀ − Aₙ₀/2) log π]
        """
        start_time = time.time()
        self._check_bernoulli(n, log_bernoulli)
        row = coefficient_service.coefficient_row(n)
        a0 = row.a0
        inv_a0 = 1 / a0

        with mp.workdps(plan.working_digits):
            log_pi = mp.log(mp.pi)
            total = mpf(0)
            for m in range(1, n + 1):
                log_gamma = special_values_service.log_gamma_half(m, plan.working_digits)
                term = coefficient_service.to_mpf(row[m]) * (log_bernoulli[m] - log_gamma)
                total = total - term if m % 2 else total + term
            total += coefficient_service.to_mpf(inv_a0 - a0) * mp.log(2)
            total += coefficient_service.to_mpf(inv_a0 - a0 / 2) * log_pi
            value = log_pi / 2 + (total if n % 2 == 0 else -total)
            return self._record(n, value, LambdaForm.V_FORM, plan, start_time)

    @staticmethod
    def delta_lambda(record: LambdaRecord) -> mpf:
        return record.delta

    @staticmethod
    def rectified_delta(record: LambdaRecord) -> mpf:
        """(−1)ⁿ δΛₙ"""
        return record.delta if record.n % 2 == 0 else -record.delta

    @staticmethod
    def averaged_delta(n: int, deltas: Mapping[int, mpf]) -> mpf:
        """δΛ̄ₙ = ½(δΛₙ + δΛₙ₋₁)"""
        if n < 2:
            raise DomainError(f"平均余项需要 n >= 2, 收到 n={n}")
        if n not in deltas or n - 1 not in deltas:
            raise DomainError(f"计算 δΛ̄_{n} 需要 δΛ_{n} 与 δΛ_{n - 1}")
        return (deltas[n] + deltas[n - 1]) / 2

    def _evaluate(self, n: int, plan: PrecisionPlan, form: LambdaForm, table: Optional[XiLogTable],
                  log_bernoulli: Optional[Mapping[int, mpf]]) -> LambdaRecord:
        form = LambdaForm(form)
        if form == LambdaForm.DIRECT:
            return self.lambda_direct(n, plan, table)
        if form == LambdaForm.U_FORM:
            return self.lambda_u_form(n, plan, log_bernoulli)
        return self.lambda_v_form(n, plan, log_bernoulli)

    def compute(
            self,
            n: int,
            target_digits: int,
            form: LambdaForm = LambdaForm.DIRECT,
            table: Optional[XiLogTable] = None,
            working_digits: Optional[int] = None,
            workers: int = 1,
            cache: Optional[XiLogCache] = None,
    ) -> LambdaRecord:
        """按精度计划计算单个 Λₙ; 未给出表时按计划精度构建 (读写缓存)"""
        plan = precision_service.plan_for(n, target_digits)
        if working_digits is not None:
            plan = precision_service.with_working_digits(plan, working_digits)

        form = LambdaForm(form)
        log_bernoulli = None
        if form == LambdaForm.DIRECT:
            if table is None:
                table = special_values_service.build_table(
                    n, plan.working_digits, XiRoute.GAMMA_ZETA, workers, cache if cache is not None else get_cache()
                )
        else:
            log_bernoulli = special_values_service.bernoulli_log_table(n, plan.working_digits, workers)

        record = self._evaluate(n, plan, form, table, log_bernoulli)
        logger.info(f"Λ_{n} = {mp.nstr(record.value, 20)} ({form.value}, {plan.working_digits} 位, "
                    f"耗时: {record.elapsed:.3f}s)")
        return record

    def scan(
            self,
            n_from: int,
            n_to: int,
            target_digits: int,
            form: LambdaForm = LambdaForm.DIRECT,
            workers: int = 1,
            cache: Optional[XiLogCache] = None,
    ) -> List[LambdaRecord]:
        """计算 n_from…n_to 的 Λₙ, 共用一张按 n_to 构建的只读表, 按 n 并行"""
        if n_from > n_to:
            return []
        start_time = time.time()
        form = LambdaForm(form)
        top_plan = precision_service.plan_for(n_to, target_digits)

        table = None
        log_bernoulli = None
        if form == LambdaForm.DIRECT:
            table = special_values_service.build_table(
                n_to, top_plan.working_digits, XiRoute.GAMMA_ZETA, workers, cache if cache is not None else get_cache()
            )
        else:
            log_bernoulli = special_values_service.bernoulli_log_table(n_to, top_plan.working_digits, workers)

        n_values = list(range(n_from, n_to + 1))
        if workers <= 1:
            records = [
                self._evaluate(n, precision_service.plan_for(n, target_digits), form, table, log_bernoulli)
                for n in n_values
            ]
        else:
            strings = table.to_strings() if table is not None else _mpf_strings(log_bernoulli, top_plan.working_digits)
            results = parallel_map(
                _scan_worker,
                [(n, target_digits, form.value) for n in n_values],
                workers,
                initializer=_init_scan_worker,
                initargs=(strings, top_plan.working_digits, form == LambdaForm.DIRECT),
            )
            records = [_record_from_strings(item) for item in results]

        logger.info(f"扫描 n={n_from}…{n_to} 完成, 共 {len(records)} 项, 耗时: {time.time() - start_time:.3f}s")
        return records

    def stability_check(self, n: int, plan: PrecisionPlan, table: Optional[XiLogTable] = None,
                        factor: float = 1.25) -> mpf:
        """工作精度提高 factor 倍后 Λₙ 的变化量"""
        high_digits = precision_service.bumped(plan, factor).working_digits
        if table is None or table.digits < high_digits or not table.covers(n):
            table = special_values_service.build_table(n, high_digits)

        def evaluate(digits: int) -> mpf:
            return self.lambda_direct(n, precision_service.with_working_digits(plan, digits), table).value

        return precision_service.stability(evaluate, plan, factor)


def _mpf_strings(values: Mapping[int, mpf], digits: int) -> Dict[int, str]:
    return {m: mp.nstr(v, digits + EXTRA_DIGITS) for m, v in values.items()}


def _init_scan_worker(strings: Dict[int, str], digits: int, is_table: bool):
    if is_table:
        _worker_state["table"] = special_values_service.table_from_strings(strings, digits)
    else:
        with mp.workdps(digits + EXTRA_DIGITS):
            _worker_state["log_bernoulli"] = {m: mpf(text) for m, text in strings.items()}


def _scan_worker(args: Tuple[int, int, str]) -> Tuple[int, str, str, str, int, float]:
    n, target_digits, form = args
    plan = precision_service.plan_for(n, target_digits)
    record = lambda_service._evaluate(
        n, plan, LambdaForm(form), _worker_state.get("table"), _worker_state.get("log_bernoulli")
    )
    sig = plan.working_digits
    return (n, mp.nstr(record.value, sig), mp.nstr(record.delta, sig), record.form.value,
            record.digits_used, record.elapsed)


def _record_from_strings(item: Tuple[int, str, str, str, int, float]) -> LambdaRecord:
    n, value, delta, form, digits_used, elapsed = item
    with mp.workdps(digits_used):
        return LambdaRecord(n=n, value=mpf(value), delta=mpf(delta), form=LambdaForm(form),
                            digits_used=digits_used, elapsed=elapsed)


# 创建单例实例
lambda_service = LambdaService()
