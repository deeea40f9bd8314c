import math

from mpmath import mpf
from pydantic import BaseModel, Field, model_validator

from app.config import settings


class ViolationHypothesis(BaseModel):
    """假想的违反 RH 的零点 ρ = ½ + t + iT"""
    t: float = Field(..., gt=0, lt=0.5)
    T: float
    T0: float = Field(default_factory=lambda: settings.CONFIRMED_HEIGHT_T0, gt=0)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_height(self):
        if self.T <= self.T0:
            raise ValueError(f"T={self.T:g} 必须高于已验证高度 T0={self.T0:g}")
        return self


class MagnitudeEstimate(BaseModel):
    """数量级估计: mantissa · 10^exponent"""
    mantissa: float
    exponent: int

    class Config:
        frozen = True

    @classmethod
    def from_log10(cls, log10_value: float) -> "MagnitudeEstimate":
        exponent = math.floor(log10_value)
        mantissa = 10 ** (log10_value - exponent)
        # 舍入可能使尾数等于 10
        if mantissa >= 9.9999999995:
            mantissa, exponent = 1.0, exponent + 1
        return cls(mantissa=mantissa, exponent=exponent)

    @property
    def log10(self) -> float:
        return math.log10(self.mantissa) + self.exponent

    def __str__(self) -> str:
        return f"{self.mantissa:.2f}e{self.exponent:+03d}"


class EndpointSlopes(BaseModel):
    n: int = Field(..., ge=1)
    slope0: int
    # Σ 1/(4m−1) 的直接求和与 digamma 形式
    slope_pi: mpf
    slope_pi_digamma: mpf

    class Config:
        frozen = True
        arbitrary_types_allowed = True
