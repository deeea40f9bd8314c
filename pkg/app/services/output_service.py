import csv
import logging
import sys
from contextlib import contextmanager
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from pathlib import Path
from typing import Dict, Iterable, List, Optional, TextIO

from mpmath import mp, mpf

from app.schemas.centered import CenteredRow
from app.schemas.lambda_record import LambdaRecord
from app.services.lambda_service import lambda_service

logger = logging.getLogger(__name__)

LAMBDA_FIELDS = ["n", "lambda", "delta", "n_avg_delta"]
CENTERED_FIELDS = ["n", "centered_lambda", "remainder"]


def format_fixed(value, decimals: int) -> str:
    """定点小数输出, 保留 decimals 位小数 (银行家舍入), 相同输入得到逐字节相同的字符串"""
    # 在足够高的精度下转换, 不经默认 15 位舍入
    with mp.workdps(max(mp.dps, decimals + 40)):
        head = mpf(value)
        if head == 0:
            return "0." + "0" * decimals if decimals > 0 else "0"
        magnitude = max(0, int(mp.floor(mp.log10(abs(head)))) + 1)

    with mp.workdps(decimals + magnitude + 20):
        text = mp.nstr(mpf(value), decimals + magnitude + 20)
    with localcontext() as ctx:
        ctx.prec = decimals + magnitude + 25
        rounded = Decimal(text).quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_EVEN)
        if rounded == 0:
            rounded = rounded.copy_abs()
        return f"{rounded:f}"


@contextmanager
def open_output(path: Optional[str]):
    """path 为空时写到 stdout"""
    if not path:
        yield sys.stdout
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as f:
        yield f
    logger.info(f"结果已写入 {target}")


class OutputService:
    """CSV 与文本输出"""

    def lambda_rows(self, records: Iterable[LambdaRecord], print_digits: int) -> List[Dict[str, str]]:
        records = list(records)
        deltas = {record.n: record.delta for record in records}
        rows = []
        for record in records:
            n_avg_delta = ""
            if record.n >= 2 and record.n - 1 in deltas:
                with mp.workdps(record.digits_used):
                    n_avg_delta = format_fixed(record.n * lambda_service.averaged_delta(record.n, deltas), print_digits)
            rows.append({
                "n": str(record.n),
                "lambda": format_fixed(record.value, print_digits),
                "delta": format_fixed(record.delta, print_digits),
                "n_avg_delta": n_avg_delta,
            })
        return rows

    def write_lambda_csv(self, records: Iterable[LambdaRecord], stream: TextIO, print_digits: int) -> int:
        """表头 n,lambda,delta,n_avg_delta; n−1 不在同一次扫描中时 n_avg_delta 留空"""
        rows = self.lambda_rows(records, print_digits)
        writer = csv.DictWriter(stream, fieldnames=LAMBDA_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return len(rows)

    def write_centered_csv(self, rows: Iterable[CenteredRow], stream: TextIO, print_digits: int) -> int:
        """表头 n,centered_lambda,remainder"""
        writer = csv.DictWriter(stream, fieldnames=CENTERED_FIELDS, lineterminator="\n")
        writer.writeheader()
        count = 0
        for row in rows:
            writer.writerow({
                "n": str(row.n),
                "centered_lambda": format_fixed(row.value, print_digits),
                "remainder": format_fixed(row.remainder, print_digits),
            })
            count += 1
        return count


# 创建单例实例
output_service = OutputService()
