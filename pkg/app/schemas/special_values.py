from enum import Enum
from typing import Dict

from mpmath import mpf, nstr
from pydantic import BaseModel, Field


class XiRoute(str, Enum):
    GAMMA_ZETA = "gamma_zeta"
    BERNOULLI = "bernoulli"


class XiLogTable(BaseModel):
    """log 2ξ(2m), m = 1…n_max 的高精度值表, 构建完成后只读"""
    entries: Dict[int, mpf]
    digits: int = Field(..., ge=1)
    route: XiRoute = XiRoute.GAMMA_ZETA

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @property
    def n_max(self) -> int:
        return max(self.entries, default=0)

    def covers(self, n: int) -> bool:
        return all(m in self.entries for m in range(1, n + 1))

    def __getitem__(self, m: int) -> mpf:
        return self.entries[m]

    def to_strings(self) -> Dict[int, str]:
        """转换为十进制字符串, 用于进程间传递"""
        return {m: nstr(v, self.digits + 5) for m, v in self.entries.items()}
