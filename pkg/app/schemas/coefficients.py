from fractions import Fraction
from typing import List

from pydantic import BaseModel, Field, model_validator


class CoefficientRow(BaseModel):
    """固定 n 的精确有理系数 Aₙ₀ … Aₙₙ"""
    n: int = Field(..., ge=1)
    values: List[Fraction]

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @model_validator(mode="after")
    def check_length(self):
        if len(self.values) != self.n + 1:
            raise ValueError(f"系数行长度应为 {self.n + 1}, 实际为 {len(self.values)}")
        return self

    @property
    def a0(self) -> Fraction:
        return self.values[0]

    def __getitem__(self, m: int) -> Fraction:
        return self.values[m]
