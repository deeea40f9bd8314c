from typing import List

from mpmath import mpf
from pydantic import BaseModel, Field, model_validator

# 4·min|Im ρ|², 由第一个零点 γ₁ = 14.134725… 给出
W_TILDE_MAX = 799.1618


class CenteredConfig(BaseModel):
    """中心化变体参数 w̃ 及 rₘ = √(1+(4m−1)²/w̃), m = 0…n"""
    w_tilde: float = Field(..., gt=0, lt=W_TILDE_MAX)
    n: int = Field(..., ge=0)
    digits: int = Field(..., ge=1)
    radii: List[mpf]

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @model_validator(mode="after")
    def check_radii(self):
        if len(self.radii) != self.n + 1:
            raise ValueError(f"需要 {self.n + 1} 个 rₘ, 实际为 {len(self.radii)}")
        for m in range(1, len(self.radii)):
            if not self.radii[m] > self.radii[m - 1]:
                raise ValueError(f"rₘ 未严格递增 (m={m})")
        if self.radii and not self.radii[0] > 1:
            raise ValueError("r₀ 必须大于 1")
        return self


class CenteredRow(BaseModel):
    n: int = Field(..., ge=1)
    value: mpf
    # Λ⁰ₙ − √w̃ (log n + C)
    remainder: mpf

    class Config:
        frozen = True
        arbitrary_types_allowed = True
