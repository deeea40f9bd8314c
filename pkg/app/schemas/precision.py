from typing import Dict

from pydantic import BaseModel, Field, model_validator


class PrecisionPlan(BaseModel):
    """交错求和的工作精度计划 (十进制位数)"""
    n: int = Field(..., ge=1)
    target_digits: int = Field(..., ge=1)
    working_digits: int
    guard_digits: int = Field(..., ge=0)
    peak_ratio: float
    profile: Dict[int, int] = {}

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_budget(self):
        peak = max(self.profile.values(), default=0)
        if self.working_digits < peak + self.guard_digits:
            raise ValueError(
                f"工作精度 {self.working_digits} 低于峰值需求 {peak} + 保护位 {self.guard_digits}"
            )
        return self

    @property
    def peak_m(self) -> int:
        """所需精度最高的求和项下标"""
        if not self.profile:
            return 0
        return max(self.profile, key=lambda m: (self.profile[m], -m))
