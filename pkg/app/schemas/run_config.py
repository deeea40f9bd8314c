from enum import Enum
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from app.config import settings
from app.schemas.lambda_record import LambdaForm


class Command(str, Enum):
    COMPUTE = "compute"
    SCAN = "scan"
    ZERO_SUM = "zero-sum"
    THRESHOLD = "threshold"
    CENTERED = "centered"
    PRECISION_REPORT = "precision-report"
    VERIFY = "verify"


# 各命令必需的参数
_REQUIRED = {
    Command.COMPUTE: ("n",),
    Command.SCAN: ("n_from", "n_to"),
    Command.ZERO_SUM: ("n", "zeros_path"),
    Command.THRESHOLD: ("t", "T"),
    Command.PRECISION_REPORT: ("n",),
    Command.VERIFY: ("n",),
}


class RunConfig(BaseModel):
    command: Command
    n: Optional[int] = Field(None, ge=1)
    n_from: Optional[int] = Field(None, ge=1)
    n_to: Optional[int] = Field(None, ge=1)
    digits: Union[int, Literal["auto"]] = "auto"
    form: LambdaForm = LambdaForm.DIRECT
    zeros_path: Optional[str] = None
    pairs: Optional[int] = Field(None, ge=0)
    w_tilde: Optional[float] = None
    out: Optional[str] = None
    print_digits: Optional[int] = Field(None, ge=1)
    working_digits: Optional[int] = Field(None, ge=1)
    workers: int = Field(1, ge=1)
    t: Optional[float] = None
    T: Optional[float] = None
    T0: Optional[float] = None
    validate_precision: bool = False

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_flags(self):
        missing = [name for name in _REQUIRED.get(self.command, ()) if getattr(self, name) is None]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise ValueError(f"命令 {self.command.value} 缺少参数: {flags}")
        if isinstance(self.digits, int) and self.digits < 1:
            raise ValueError("--digits 必须为正整数或 auto")
        if self.command == Command.CENTERED and self.n is None and (self.n_from is None or self.n_to is None):
            raise ValueError("命令 centered 需要 --n 或 --from/--to")
        return self

    def target_digits(self) -> int:
        """auto 时以打印位数作为目标精度"""
        if self.digits == "auto":
            return self.print_digits or settings.PRINT_DIGITS
        return self.digits

    def decimals(self) -> int:
        """输出的小数位数: 显式 --print-digits 优先, 否则与目标精度一致"""
        return self.print_digits or self.target_digits()

    def n_values(self) -> List[int]:
        if self.n_from is not None and self.n_to is not None:
            return list(range(self.n_from, self.n_to + 1))
        return [self.n] if self.n is not None else []
