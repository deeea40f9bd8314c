import logging
import sys

from pydantic import ValidationError

from app.config import settings
from app.exceptions import DomainError, KeiperLiError, VerificationFailedError
from app.schemas.detection import ViolationHypothesis
from app.schemas.run_config import Command, RunConfig
from app.services.centered_service import centered_service
from app.services.detection_service import detection_service
from app.services.lambda_service import lambda_service
from app.services.output_service import format_fixed, open_output, output_service
from app.services.precision_service import precision_service
from app.services.special_values_service import special_values_service
from app.services.verification_service import verification_service
from app.services.zeros_service import zeros_service

logger = logging.getLogger(__name__)

# 未预期异常的退出码
EXIT_INTERNAL_ERROR = 70

# precision-report 中实测剖面的最大 n
MEASURED_PROFILE_MAX_N = 2000


def compute(config: RunConfig) -> int:
    """计算单个 Λₙ, 只向 stdout 输出数值"""
    record = lambda_service.compute(
        config.n,
        config.target_digits(),
        config.form,
        working_digits=config.working_digits,
        workers=config.workers,
    )
    print(format_fixed(record.value, config.decimals()))
    return 0


def scan(config: RunConfig) -> int:
    """n 区间扫描, 输出 n,lambda,delta,n_avg_delta"""
    records = lambda_service.scan(config.n_from, config.n_to, config.target_digits(), config.form, config.workers)
    with open_output(config.out) as stream:
        output_service.write_lambda_csv(records, stream, config.decimals())
    return 0


def zero_sum(config: RunConfig) -> int:
    """零点求和与直接公式对比, 输出 n,direct,zero_sum,tail_bound"""
    table = zeros_service.load_zeros(config.zeros_path)
    pairs = table.count if config.pairs is None else config.pairs
    decimals = config.decimals()
    direct = lambda_service.compute(config.n, config.target_digits(), workers=config.workers)
    result = zeros_service.zero_sum(config.n, table, pairs, digits=config.target_digits(), workers=config.workers)
    with open_output(config.out) as stream:
        stream.write("n,direct,zero_sum,tail_bound\n")
        stream.write(
            f"{config.n},{format_fixed(direct.value, decimals)},{format_fixed(result.value, decimals)},"
            f"{result.tail_bound:.6e}\n"
        )
    return 0


def threshold(config: RunConfig) -> int:
    """交叉阈值 TN / TNI 的数量级报告"""
    params = {"t": config.t, "T": config.T}
    if config.T0 is not None:
        params["T0"] = config.T0
    try:
        hypothesis = ViolationHypothesis(**params)
    except ValidationError as e:
        raise DomainError(f"违反 RH 的假设参数无效: {e.errors()[0]['msg']}")
    print(detection_service.report(hypothesis))
    return 0


def centered(config: RunConfig) -> int:
    """中心化变体扫描, 输出 n,centered_lambda,remainder"""
    w_tilde = config.w_tilde if config.w_tilde is not None else settings.CENTERED_W_DEFAULT
    rows = centered_service.centered_scan(
        config.n_values(), w_tilde, config.target_digits(), config.workers, config.validate_precision
    )
    with open_output(config.out) as stream:
        output_service.write_centered_csv(rows, stream, config.decimals())
    return 0


def precision_report(config: RunConfig) -> int:
    """精度计划与 ϖ 剖面, n 不太大时附实测 log₁₀|Aₙₘ log 2ξ(2m)|"""
    plan = precision_service.plan_for(config.n, config.target_digits())
    if config.working_digits is not None:
        plan = precision_service.with_working_digits(plan, config.working_digits)

    measured = {}
    if config.n <= MEASURED_PROFILE_MAX_N:
        table = special_values_service.build_table(config.n, 30, workers=config.workers)
        measured = precision_service.measured_profile(config.n, table)

    with open_output(config.out) as stream:
        stream.write(f"# n={plan.n} target_digits={plan.target_digits} working_digits={plan.working_digits} "
                     f"guard_digits={plan.guard_digits} peak_ratio={plan.peak_ratio:.6f} peak_m={plan.peak_m}\n")
        stream.write("m,profile,measured\n")
        for m, digits in plan.profile.items():
            value = f"{measured[m]:.3f}" if m in measured else ""
            stream.write(f"{m},{digits},{value}\n")
    return 0


def verify(config: RunConfig) -> int:
    """一致性检查集合, 任一失败退出码为 1"""
    table = zeros_service.load_zeros(config.zeros_path) if config.zeros_path else None
    report = verification_service.run(config.n, config.target_digits(), table, config.pairs)
    for check in report.checks:
        print(check)
    if not report.passed:
        names = ", ".join(check.name for check in report.failures)
        raise VerificationFailedError(f"{len(report.failures)} 项检查未通过: {names}")
    return 0


HANDLERS = {
    Command.COMPUTE: compute,
    Command.SCAN: scan,
    Command.ZERO_SUM: zero_sum,
    Command.THRESHOLD: threshold,
    Command.CENTERED: centered,
    Command.PRECISION_REPORT: precision_report,
    Command.VERIFY: verify,
}


def run(config: RunConfig) -> int:
    """执行命令并把异常映射为退出码, 诊断信息写到 stderr"""
    try:
        return HANDLERS[config.command](config)
    except KeiperLiError as e:
        logger.error(f"{config.command.value} 失败: {e.detail}")
        print(f"错误: {e.detail}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"{config.command.value} 发生未预期的错误: {str(e)}", exc_info=True)
        print(f"内部错误: {str(e)}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
