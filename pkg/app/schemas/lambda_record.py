from enum import Enum

from mpmath import mpf
from pydantic import BaseModel, Field


class LambdaForm(str, Enum):
    DIRECT = "direct"
    U_FORM = "u_form"
    V_FORM = "v_form"


class LambdaRecord(BaseModel):
    n: int = Field(..., ge=1)
    value: mpf
    # δΛₙ = Λₙ − (log n + C)
    delta: mpf
    form: LambdaForm
    digits_used: int
    elapsed: float = 0.0

    class Config:
        frozen = True
        arbitrary_types_allowed = True
