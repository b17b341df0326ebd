from dataclasses import dataclass
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from qkdhydro.common.exception import DomainError, LengthMismatchError
from qkdhydro.models import BitString


class LeakSource(str, Enum):
    PARITY = "parity"
    ANALYTIC = "analytic"

    def description(self) -> str:
        return {
            LeakSource.PARITY: "Parity bits actually sent by the Hamming(7,4) reconciliation",
            LeakSource.ANALYTIC: "ceil(f * n * h(qber)) from the reconciliation efficiency",
        }[self]


class PostprocSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    sample_fraction: float = Field(default=0.1, gt=0, le=1)
    qber_threshold: float = Field(default=0.11, ge=0, le=1)
    ec_efficiency: float = Field(default=1.16, ge=1, description="f, reconciliation inefficiency")
    leak_source: LeakSource = LeakSource.PARITY
    max_passes: int = Field(default=16, ge=1, description="Hamming passes before reconciliation gives up")
    confidence: float = Field(default=0.95, gt=0, lt=1, description="Level of the QBER upper bound")


@dataclass(frozen=True, slots=True)
class SiftedKeyPair:
    alice: BitString
    bob: BitString

    def __post_init__(self):
        if len(self.alice) != len(self.bob):
            raise LengthMismatchError(alice=len(self.alice), bob=len(self.bob))

    def __len__(self) -> int:
        return len(self.alice)

    @classmethod
    def empty(cls) -> "SiftedKeyPair":
        return cls(BitString.zeros(0), BitString.zeros(0))

    @property
    def mismatches(self) -> int:
        return (self.alice ^ self.bob).weight()

    @property
    def matches(self) -> bool:
        return self.alice == self.bob


@dataclass(frozen=True, slots=True)
class SecureKey:
    bits: BitString
    epsilon_sec: float
    provenance: str

    def __post_init__(self):
        if len(self.bits) == 0:
            raise DomainError("A secure key cannot be empty")

    def __len__(self) -> int:
        return len(self.bits)
