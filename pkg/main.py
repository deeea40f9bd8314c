import argparse
import logging
import sys

from pydantic import ValidationError

from app.api import commands
from app.config import settings
from app.db.xilog_cache import get_cache
from app.middlewares.logging_middleware import LoggingMiddleware
from app.schemas.lambda_record import LambdaForm
from app.schemas.run_config import Command, RunConfig

logger = logging.getLogger(__name__)

# 参数错误的退出码, 与 argparse 一致
EXIT_USAGE = 2


def _digits_type(value: str):
    if value == "auto":
        return value
    try:
        digits = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--digits 需要正整数或 auto, 收到 {value!r}")
    if digits < 1:
        raise argparse.ArgumentTypeError(f"--digits 需要正整数, 收到 {digits}")
    return digits


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="输出 DEBUG 级日志")
    common.add_argument("--workers", type=int, default=settings.WORKERS, help="并行进程数, 1 为顺序执行")
    common.add_argument("--print-digits", type=int, default=None, help="输出的小数位数")
    common.add_argument("--cache-dir", default=None, help="log 2ξ 缓存目录")
    common.add_argument("--no-cache", action="store_true", help="不读写缓存")
    common.add_argument("--clear-cache", action="store_true", help="运行前删除缓存目录中的 log 2ξ 缓存文件")

    parser = argparse.ArgumentParser(prog="main.py", description=settings.PROJECT_NAME)
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add(command: Command, help_text: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(command.value, parents=[common], help=help_text)

    def add_digits(sub: argparse.ArgumentParser):
        sub.add_argument("--digits", type=_digits_type, default="auto", help="目标十进制位数或 auto")

    forms = [form.value for form in LambdaForm]

    sub = add(Command.COMPUTE, "计算单个 Λₙ")
    sub.add_argument("--n", type=int, required=True)
    add_digits(sub)
    sub.add_argument("--form", choices=forms, default=LambdaForm.DIRECT.value)
    sub.add_argument("--working-digits", type=int, default=None, help="向上覆盖工作精度")

    sub = add(Command.SCAN, "扫描 n 区间并输出 CSV")
    sub.add_argument("--from", dest="n_from", type=int, required=True)
    sub.add_argument("--to", dest="n_to", type=int, required=True)
    add_digits(sub)
    sub.add_argument("--form", choices=forms, default=LambdaForm.DIRECT.value)
    sub.add_argument("--out", default=None)

    sub = add(Command.ZERO_SUM, "零点求和与直接公式对比")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--zeros", dest="zeros_path", default=settings.ZEROS_PATH or None)
    sub.add_argument("--pairs", type=int, default=None)
    add_digits(sub)
    sub.add_argument("--out", default=None)

    sub = add(Command.THRESHOLD, "违反 RH 零点的交叉阈值估计")
    sub.add_argument("--t", type=float, required=True)
    sub.add_argument("--T", type=float, required=True)
    sub.add_argument("--T0", type=float, default=None)

    sub = add(Command.CENTERED, "中心化变体 Λ⁰ₙ(w̃)")
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--from", dest="n_from", type=int, default=None)
    sub.add_argument("--to", dest="n_to", type=int, default=None)
    sub.add_argument("--w", dest="w_tilde", type=float, default=None)
    add_digits(sub)
    sub.add_argument("--validate", dest="validate_precision", action="store_true", help="以 1.25 倍精度复算校验")
    sub.add_argument("--out", default=None)

    sub = add(Command.PRECISION_REPORT, "精度计划与 ϖ 剖面")
    sub.add_argument("--n", type=int, required=True)
    add_digits(sub)
    sub.add_argument("--working-digits", type=int, default=None)
    sub.add_argument("--out", default=None)

    sub = add(Command.VERIFY, "运行一致性检查集合")
    sub.add_argument("--n", type=int, required=True)
    add_digits(sub)
    sub.add_argument("--zeros", dest="zeros_path", default=settings.ZEROS_PATH or None)
    sub.add_argument("--pairs", type=int, default=None)

    return parser


def configure_logging(verbose: bool):
    # 配置日志, 日志写到 stderr, stdout 只输出结果
    logging.basicConfig(
        level=logging.DEBUG if verbose or settings.DEBUG else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr),
        ]
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    if args.cache_dir:
        settings.CACHE_DIR = args.cache_dir
    if args.no_cache:
        settings.CACHE_ENABLED = False
    if args.clear_cache:
        cache = get_cache()
        if cache is not None:
            logger.info(f"已清除 {cache.clear()} 个缓存文件")

    fields = {name: value for name, value in vars(args).items()
              if name in RunConfig.model_fields and value is not None}
    try:
        config = RunConfig(**fields)
    except ValidationError as e:
        message = "; ".join(error["msg"] for error in e.errors())
        print(f"参数错误: {message}", file=sys.stderr)
        return EXIT_USAGE

    return LoggingMiddleware(commands.run).dispatch(config)


if __name__ == '__main__':
    sys.exit(main())
