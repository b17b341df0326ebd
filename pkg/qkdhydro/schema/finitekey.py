from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class EstimateMode(str, Enum):
    ORACLE = "oracle"
    BOUNDED = "bounded"

    def description(self) -> str:
        return {
            EstimateMode.ORACLE: "Ground truth counted from the photon-number buckets",
            EstimateMode.BOUNDED: "Finite-sample decoy bounds from the per-intensity counts",
        }[self]


class SweepMode(str, Enum):
    TIME = "time"
    BLOCK = "block"

    def description(self) -> str:
        return {
            SweepMode.TIME: "Fixed collection time, the block grows with the detection rate",
            SweepMode.BLOCK: "Fixed sifted block, the collection time grows as the link degrades",
        }[self]


class SweepEngine(str, Enum):
    ANALYTIC = "analytic"
    MONTECARLO = "montecarlo"


class SecurityParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    epsilon_sec: float = Field(default=1e-9, gt=0, lt=1)
    epsilon_cor: float = Field(default=1e-15, gt=0, lt=1)


class DecoyEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)
    s_x0: float = Field(..., ge=0, description="Vacuum detections in the key block")
    s_x1: float = Field(..., ge=0, description="Single-photon detections in the key block")
    phi_x: float = Field(..., ge=0, le=0.5, description="Single-photon phase error rate")
    mode: EstimateMode


class SweepSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    mode: SweepMode = SweepMode.TIME
    engine: SweepEngine = SweepEngine.ANALYTIC
    collection_time_s: float = Field(default=10.0, gt=0)
    block_size: int = Field(default=1_000_000, gt=0, description="Target sifted bits per block")
    max_collection_time_s: float = Field(default=0.0, ge=0, description="0 disables the cap")


class CurveRow(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["distance", "misalignment"]
    x: float = Field(..., description="distance_km or theta_rad")
    loss_db: float
    transmittance: float
    qber: float
    key_length_bits: int = Field(..., ge=0)
    skr_bps: float = Field(..., ge=0)
    collection_time_s: Optional[float] = None
