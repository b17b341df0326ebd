from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class SessionReport(BaseModel):
    """Outcome of one simulated key-distribution session.

    Holds no timestamps or run identifiers so identical scenarios give
    byte-identical reports.
    """

    model_config = ConfigDict(frozen=True)
    length_km: float
    loss_db: float
    transmittance: float
    pulse_count: int
    seed: int
    qber: float
    qber_upper: float
    sifted_bits: int
    sample_bits: int
    leak_ec_bits: int
    s_x0: float
    s_x1: float
    phi_x: float
    key_length_bits: int = Field(..., ge=0)
    skr_bps: float = Field(..., ge=0)
    elapsed_time_s: float
    aborted: bool = False
    keys_match: Optional[bool] = None
