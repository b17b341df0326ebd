from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

from qkdhydro.models import BitString, CipherMode

TAG_WIDTH = 64
NONCE_WIDTH = 64


class Allocation(BaseModel):
    """One ledger line: bits ``[start_bit, end_bit)`` handed out for ``purpose``."""

    model_config = ConfigDict(frozen=True, extra="forbid")
    purpose: str = Field(..., min_length=1)
    start_bit: int = Field(..., ge=0)
    end_bit: int = Field(..., ge=0)
    timestamp: str = Field(..., description="UTC, ISO 8601")

    @model_validator(mode="after")
    def check_range(self) -> Self:
        if self.end_bit < self.start_bit:
            raise ValueError("end_bit must not precede start_bit")
        return self

    @property
    def length(self) -> int:
        return self.end_bit - self.start_bit


@dataclass(frozen=True, slots=True)
class AuthenticatedMessage:
    payload: BitString
    nonce: BitString
    tag: BitString
    mask_allocation: Allocation | None = None


class PlanReport(BaseModel):
    model_config = ConfigDict(frozen=True)
    skr_bps: float = Field(..., ge=0)
    bandwidth_bps: float = Field(..., ge=0)
    surplus_bps: float
    mode: CipherMode
    description: str
