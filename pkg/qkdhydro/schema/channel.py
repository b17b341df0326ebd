import math
from typing import List

from pydantic import BaseModel, ConfigDict, Field


class FiberLink(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    attenuation_db_per_km: float = Field(default=0.2, gt=0, description="a, fiber attenuation")
    length_km: float = Field(default=25.0, ge=0, description="L, fiber length")


class DetectorModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    dark_count_probability: float = Field(default=1e-5, ge=0, le=0.5, description="p_dc per gate and detector")
    after_pulse_probability: float = Field(default=1e-4, ge=0, le=1, description="p_ap")
    efficiency: float = Field(default=0.2, ge=0, le=1, description="eta_det")


class NoiseSource(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    name: str = Field(default="source", description="Label taken from the scenario section")
    frequency_hz: float = Field(..., gt=0)
    amplitude_mm: float = Field(..., ge=0)
    coupling_rad_per_mm: float = Field(default=0.05, ge=0, description="Polarization rotation per mm of vibration")
    phase_rad: float = Field(default=0.0)


class EnvironmentProfile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    baseline_misalignment_rad: float = Field(default=0.0, ge=0, le=math.pi / 2, description="theta0")
    sources: List[NoiseSource] = Field(default_factory=list)
