from .channel import DetectorModel, EnvironmentProfile, FiberLink, NoiseSource
from .crypto import NONCE_WIDTH, TAG_WIDTH, Allocation, AuthenticatedMessage, PlanReport
from .finitekey import CurveRow, DecoyEstimate, EstimateMode, SecurityParams, SweepEngine, SweepMode, SweepSettings
from .postproc import LeakSource, PostprocSettings, SecureKey, SiftedKeyPair
from .report import SessionReport
from .scenario import EnvironmentSettings, Scenario
from .simulation import SimulationConfig
from .tally import PHOTON_BUCKETS, TallyTable

__all__ = [
    "FiberLink",
    "DetectorModel",
    "NoiseSource",
    "EnvironmentProfile",
    "SimulationConfig",
    "TallyTable",
    "PHOTON_BUCKETS",
    "SecurityParams",
    "DecoyEstimate",
    "EstimateMode",
    "SweepMode",
    "SweepEngine",
    "SweepSettings",
    "CurveRow",
    "PostprocSettings",
    "LeakSource",
    "SiftedKeyPair",
    "SecureKey",
    "Allocation",
    "AuthenticatedMessage",
    "PlanReport",
    "TAG_WIDTH",
    "NONCE_WIDTH",
    "EnvironmentSettings",
    "Scenario",
    "SessionReport",
]
