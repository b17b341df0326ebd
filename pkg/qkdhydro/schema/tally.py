from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from qkdhydro.models import IntensityClass

CLASSES = len(IntensityClass)
# photon-number buckets of the oracle: n = 0, n = 1, n >= 2
PHOTON_BUCKETS = ("0", "1", "2+")
_TOLERANCE = 1e-6


def _vector(values, shape) -> np.ndarray:
    array = np.asarray(values)
    if array.dtype.kind not in "iuf":
        raise TypeError("Tally counts must be numeric")
    return np.broadcast_to(array, shape).copy()


@dataclass
class TallyTable:
    """Per-intensity counts of one simulated (or expected) run.

    Counts are integers for Monte Carlo runs and expected values (floats) for the
    analytic engine. Oracle arrays are indexed ``[intensity class, photon bucket]``.
    """

    sent: np.ndarray
    detected: np.ndarray
    detected_sifted: np.ndarray
    errors_sifted: np.ndarray
    oracle_detected: Optional[np.ndarray] = None
    oracle_errors: Optional[np.ndarray] = None
    elapsed_time: float = 0.0
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.sent = _vector(self.sent, (CLASSES,))
        self.detected = _vector(self.detected, (CLASSES,))
        self.detected_sifted = _vector(self.detected_sifted, (CLASSES,))
        self.errors_sifted = _vector(self.errors_sifted, (CLASSES,))
        if (self.oracle_detected is None) != (self.oracle_errors is None):
            raise ValueError("Oracle detections and errors must be given together")
        if self.oracle_detected is not None:
            self.oracle_detected = _vector(self.oracle_detected, (CLASSES, len(PHOTON_BUCKETS)))
            self.oracle_errors = _vector(self.oracle_errors, (CLASSES, len(PHOTON_BUCKETS)))
        self._validate()

    def _validate(self) -> None:
        tol = _TOLERANCE * max(1.0, float(np.max(self.sent, initial=0.0)))
        if np.any(self.errors_sifted < 0):
            raise ValueError("Negative error count")
        if np.any(self.errors_sifted > self.detected_sifted + tol):
            raise ValueError("More sifted errors than sifted detections")
        if np.any(self.detected_sifted > self.detected + tol) or np.any(self.detected > self.sent + tol):
            raise ValueError("Detections exceed pulses sent")
        if self.has_oracle:
            if np.any(self.oracle_errors > self.oracle_detected + tol):
                raise ValueError("Oracle bucket with more errors than detections")
            if not np.allclose(self.oracle_detected.sum(axis=1), self.detected_sifted, rtol=0, atol=tol):
                raise ValueError("Oracle detections do not sum to the sifted detections")
            if not np.allclose(self.oracle_errors.sum(axis=1), self.errors_sifted, rtol=0, atol=tol):
                raise ValueError("Oracle errors do not sum to the sifted errors")
        if self.elapsed_time < 0:
            raise ValueError("Negative elapsed time")

    @classmethod
    def empty(cls, elapsed_time: float = 0.0, oracle: bool = True) -> "TallyTable":
        zeros = np.zeros(CLASSES, dtype=np.int64)
        buckets = np.zeros((CLASSES, len(PHOTON_BUCKETS)), dtype=np.int64) if oracle else None
        return cls(zeros, zeros, zeros, zeros, buckets, buckets, elapsed_time)

    @property
    def has_oracle(self) -> bool:
        return self.oracle_detected is not None

    @property
    def total_sifted(self) -> float:
        return float(self.detected_sifted.sum())

    @property
    def total_errors(self) -> float:
        return float(self.errors_sifted.sum())

    @property
    def qber(self) -> float:
        total = self.total_sifted
        return self.total_errors / total if total > 0 else 0.0

    def row(self, intensity: IntensityClass) -> Dict[str, float]:
        i = IntensityClass(intensity).index
        return {
            "sent": self.sent[i].item(),
            "detected": self.detected[i].item(),
            "detected_sifted": self.detected_sifted[i].item(),
            "errors_sifted": self.errors_sifted[i].item(),
        }

    def merge(self, other: "TallyTable") -> "TallyTable":
        oracle = self.has_oracle and other.has_oracle
        return TallyTable(
            sent=self.sent + other.sent,
            detected=self.detected + other.detected,
            detected_sifted=self.detected_sifted + other.detected_sifted,
            errors_sifted=self.errors_sifted + other.errors_sifted,
            oracle_detected=self.oracle_detected + other.oracle_detected if oracle else None,
            oracle_errors=self.oracle_errors + other.oracle_errors if oracle else None,
            elapsed_time=self.elapsed_time + other.elapsed_time,
            meta={**self.meta, **other.meta},
        )
