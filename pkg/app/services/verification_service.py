import logging
import time
from typing import Callable, Optional

from mpmath import mp, mpf

from app.exceptions import KeiperLiError
from app.schemas.lambda_record import LambdaForm
from app.schemas.verification import CheckResult, VerificationReport
from app.schemas.zeros import ZeroTable
from app.services.coefficient_service import coefficient_service
from app.services.lambda_service import lambda_service
from app.services.precision_service import precision_service
from app.services.special_values_service import special_values_service
from app.services.zeros_service import zeros_service

logger = logging.getLogger(__name__)

# 函数方程抽查点
FUNCTIONAL_EQUATION_POINT = mp.mpc(2.5, 0.3)


class VerificationService:
    """verify 命令的检查集合: 求和恒等式, 三种形式一致性, 精度稳定性, 路径交叉校验, Fₙ 衰减, 零点求和"""

    def _run(self, report: VerificationReport, name: str, check: Callable[[], CheckResult]):
        start_time = time.time()
        try:
            result = check()
        except KeiperLiError as e:
            logger.error(f"检查 {name} 出错: {e.detail}")
            result = CheckResult(name=name, passed=False, detail=f"错误: {e.detail}")
        logger.info(f"{result} (耗时: {time.time() - start_time:.3f}s)")
        report.checks.append(result)

    @staticmethod
    def check_sum_rules(n: int) -> CheckResult:
        bad = [k for k in range(1, n + 1) if not coefficient_service.check_sum_rules(coefficient_service.coefficient_row(k))]
        return CheckResult(name="sum_rules", passed=not bad,
                           detail=f"n=1…{n} 精确成立" if not bad else f"不成立的 n: {bad[:10]}")

    @staticmethod
    def check_recurrence(n: int) -> CheckResult:
        bad = [
            k for k in range(1, n + 1)
            if coefficient_service.coefficient_row(k).values != coefficient_service.coefficient_row_binomial(k).values
        ]
        return CheckResult(name="recurrence_vs_binomial", passed=not bad,
                           detail=f"n=1…{n} 逐项相等" if not bad else f"不一致的 n: {bad[:10]}")

    @staticmethod
    def check_forms(n: int, target_digits: int) -> CheckResult:
        plan = precision_service.plan_for(n, target_digits)
        table = special_values_service.build_table(n, plan.working_digits)
        log_bernoulli = special_values_service.bernoulli_log_table(n, plan.working_digits)
        direct = lambda_service.lambda_direct(n, plan, table).value
        u_form = lambda_service.lambda_u_form(n, plan, log_bernoulli).value
        v_form = lambda_service.lambda_v_form(n, plan, log_bernoulli).value
        with mp.workdps(plan.working_digits):
            worst = max(abs(u_form - direct), abs(v_form - direct))
            tolerance = mpf(10) ** (5 - target_digits)
            return CheckResult(name="form_equivalence", passed=bool(worst < tolerance),
                               detail=f"Λ_{n} 三种形式最大差 {mp.nstr(worst, 3)} (容差 {mp.nstr(tolerance, 3)})")

    @staticmethod
    def check_stability(n: int, target_digits: int) -> CheckResult:
        plan = precision_service.plan_for(n, target_digits)
        diff = lambda_service.stability_check(n, plan)
        tolerance = mpf(10) ** (-target_digits)
        return CheckResult(name="precision_stability", passed=bool(diff < tolerance),
                           detail=f"精度提高 25% 后 Λ_{n} 变化 {mp.nstr(diff, 3)} (容差 1e-{target_digits})")

    @staticmethod
    def check_routes(n: int, digits: int) -> CheckResult:
        m, diff = special_values_service.cross_check_routes(n, digits)
        tolerance = mpf(10) ** (5 - digits)
        return CheckResult(name="route_cross_check", passed=bool(diff < tolerance),
                           detail=f"gamma_zeta 与 bernoulli 最大差 {mp.nstr(diff, 3)} (m={m})")

    @staticmethod
    def check_functional_equation(digits: int = 30) -> CheckResult:
        defect = special_values_service.functional_equation_defect(FUNCTIONAL_EQUATION_POINT, digits)
        return CheckResult(name="functional_equation", passed=bool(defect < mpf(10) ** (5 - digits)),
                           detail=f"|2ξ(x) − 2ξ(1−x)| = {mp.nstr(defect, 3)} (x = 2.5+0.3i)")

    @staticmethod
    def check_decay(n: int, digits: int = 15) -> CheckResult:
        fit_at = max(100.0, 4.0 * n)
        k = zeros_service.decay_constant(n, digits, fit_at)
        worst = 0.0
        for x in (10 * fit_at, 100 * fit_at):
            value = zeros_service.f_n(x, n, digits)
            with mp.workdps(zeros_service.working_digits_at(x, n, digits)):
                worst = max(worst, float(abs(value + 1 / mpf(x)) * mpf(x) ** 2))
        return CheckResult(name="fn_decay", passed=worst <= k * (1 + 1e-9),
                           detail=f"K={k:.4g} (|x|={fit_at:g} 拟合), 更远处最大 |Fₙ+1/x|·x² = {worst:.4g}")

    @staticmethod
    def check_zero_sum(n: int, table: ZeroTable, pairs: int, target_digits: int) -> CheckResult:
        direct = lambda_service.compute(n, target_digits, LambdaForm.DIRECT).value
        value, tail = zeros_service.zero_sum_lambda(n, table, pairs)
        diff = float(abs(value - direct))
        allowed = max(1e-2, tail)
        return CheckResult(name="zero_sum", passed=diff <= allowed,
                           detail=f"|direct − zero_sum| = {diff:.3e}, 允许 {allowed:.3e} (pairs={pairs})")

    def run(self, n: int, target_digits: int, table: Optional[ZeroTable] = None,
            pairs: Optional[int] = None) -> VerificationReport:
        """依次运行全部检查, 单项出错记为失败而不中断"""
        report = VerificationReport(n=n)
        self._run(report, "sum_rules", lambda: self.check_sum_rules(n))
        self._run(report, "recurrence_vs_binomial", lambda: self.check_recurrence(n))
        self._run(report, "form_equivalence", lambda: self.check_forms(n, target_digits))
        self._run(report, "precision_stability", lambda: self.check_stability(n, target_digits))
        self._run(report, "route_cross_check", lambda: self.check_routes(n, target_digits + 10))
        self._run(report, "functional_equation", lambda: self.check_functional_equation())
        self._run(report, "fn_decay", lambda: self.check_decay(n))
        if table is not None:
            used = table.count if pairs is None else pairs
            self._run(report, "zero_sum", lambda: self.check_zero_sum(n, table, used, target_digits))
        return report


# 创建单例实例
verification_service = VerificationService()
