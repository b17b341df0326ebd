from dataclasses import dataclass
from enum import Enum


class Basis(str, Enum):
    Z = "Z"
    X = "X"

    def description(self) -> str:
        return {
            Basis.Z: "Rectilinear",
            Basis.X: "Diagonal",
        }[self]


class PolarizationState(str, Enum):
    ZERO = "|0⟩"
    ONE = "|1⟩"
    PLUS = "|+⟩"
    MINUS = "|−⟩"

    @property
    def basis(self) -> Basis:
        return Basis.Z if self in (PolarizationState.ZERO, PolarizationState.ONE) else Basis.X

    @property
    def bit(self) -> int:
        return 1 if self in (PolarizationState.ONE, PolarizationState.MINUS) else 0


class IntensityClass(str, Enum):
    SIGNAL = "signal"
    DECOY = "decoy"
    VACUUM = "vacuum"

    @property
    def index(self) -> int:
        return list(IntensityClass).index(self)


@dataclass(frozen=True, slots=True)
class PulseDescriptor:
    bit: int
    basis: Basis
    intensity_class: IntensityClass
