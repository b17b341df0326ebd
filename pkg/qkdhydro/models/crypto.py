from enum import Enum


class CipherMode(str, Enum):
    OTP = "OTP"
    AUTH_ONLY = "AUTH_ONLY"

    def description(self) -> str:
        return {
            CipherMode.OTP: "One-time pad encryption with authentication",
            CipherMode.AUTH_ONLY: "Authentication only, payload sent in clear",
        }[self]


class AllocationPurpose(str, Enum):
    OTP = "otp"
    AUTH_KEY = "auth-key"
    AUTH_MASK = "auth-mask"
