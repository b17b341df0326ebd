from .bitstring import BitString
from .crypto import AllocationPurpose, CipherMode
from .protocol import Basis, IntensityClass, PolarizationState, PulseDescriptor

__all__ = [
    "BitString",
    "Basis",
    "PolarizationState",
    "IntensityClass",
    "PulseDescriptor",
    "CipherMode",
    "AllocationPurpose",
]
