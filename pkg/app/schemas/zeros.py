from typing import List

from mpmath import mpc, mpf
from pydantic import BaseModel, Field, field_validator


class ZeroTable(BaseModel):
    """黎曼零点的正纵坐标 γₖ, 每个 γₖ 代表一对 (½+iγₖ, ½−iγₖ)"""
    ordinates: List[float]
    source: str = ""

    class Config:
        frozen = True

    @field_validator("ordinates")
    @classmethod
    def check_ascending(cls, v: List[float]) -> List[float]:
        for k, gamma in enumerate(v):
            if gamma <= 0:
                raise ValueError(f"第 {k + 1} 个纵坐标非正: {gamma}")
            if k and gamma <= v[k - 1]:
                raise ValueError(f"第 {k + 1} 个纵坐标未严格递增: {gamma}")
        return v

    @property
    def count(self) -> int:
        return len(self.ordinates)


class FnEvaluation(BaseModel):
    n: int = Field(..., ge=1)
    x: mpc
    value: mpc
    branch_note: str = ""

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class ZeroSumResult(BaseModel):
    n: int = Field(..., ge=1)
    pairs: int = Field(..., ge=0)
    value: mpf
    # 启发式截断误差估计, 不计入 value
    tail_bound: float

    class Config:
        frozen = True
        arbitrary_types_allowed = True
