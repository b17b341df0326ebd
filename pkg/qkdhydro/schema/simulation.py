import math
from typing import Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

from qkdhydro.models import IntensityClass


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    pulse_count: int = Field(default=1_000_000, ge=0)
    pulse_rate: float = Field(default=1e6, gt=0, description="Pulses per second")
    # Intensities (mean photon number)
    mu_signal: float = Field(default=0.5, ge=0)
    mu_decoy: float = Field(default=0.1, ge=0)
    mu_vacuum: float = Field(default=0.0, ge=0)
    # Intensity probabilities
    p_signal: float = Field(default=0.7, ge=0, le=1)
    p_decoy: float = Field(default=0.2, ge=0, le=1)
    p_vacuum: float = Field(default=0.1, ge=0, le=1)
    basis_probability_x: float = Field(default=0.5, ge=0, le=1)
    seed: int = Field(default=7, ge=0)
    partitions: int = Field(default=1, ge=1, description="Independently seeded pulse streams")

    @model_validator(mode="after")
    def check_intensities(self) -> Self:
        # all three at zero is a dark run, the only configuration allowed to tie
        dark = self.mu_signal == self.mu_decoy == self.mu_vacuum == 0.0
        if not (dark or self.mu_signal > self.mu_decoy > self.mu_vacuum):
            raise ValueError("intensities must satisfy mu_signal > mu_decoy > mu_vacuum, or all be 0")
        if not math.isclose(self.p_signal + self.p_decoy + self.p_vacuum, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError("intensity probabilities must sum to 1")
        return self

    @property
    def intensities(self) -> np.ndarray:
        return np.array([self.mu_signal, self.mu_decoy, self.mu_vacuum], dtype=np.float64)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([self.p_signal, self.p_decoy, self.p_vacuum], dtype=np.float64)

    @property
    def intensity_map(self) -> Dict[IntensityClass, float]:
        return dict(zip(IntensityClass, self.intensities.tolist()))

    @property
    def sifting_probability(self) -> float:
        px = self.basis_probability_x
        return px * px + (1 - px) * (1 - px)

    @property
    def elapsed_time(self) -> float:
        return self.pulse_count / self.pulse_rate
