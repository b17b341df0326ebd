from typing import Any

from qkdhydro.common.message import ErrorCode, get_message


class QKDError(Exception):
    exit_code: int = 1
    default_error: ErrorCode = ErrorCode.SERVER_ERROR

    def __init__(
        self,
        message: str | None = None,
        error: ErrorCode | None = None,
        **detail: Any,
    ):
        self.error = error or self.default_error
        self.message = message or get_message(self.error)
        self.detail = detail
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": self.error.value,
            "message": self.message,
            "detail": self.detail,
        }


class EncodingError(QKDError, ValueError):
    exit_code = 2
    default_error = ErrorCode.ENCODING_ERROR


class LengthMismatchError(QKDError, ValueError):
    exit_code = 2
    default_error = ErrorCode.LENGTH_MISMATCH


class DomainError(QKDError, ValueError):
    exit_code = 2
    default_error = ErrorCode.DOMAIN_ERROR


class DegenerateChannelError(QKDError, ValueError):
    exit_code = 2
    default_error = ErrorCode.DEGENERATE_CHANNEL


class ConfigurationError(QKDError):
    exit_code = 2
    default_error = ErrorCode.CONFIG_ERROR


class EstimationError(QKDError):
    exit_code = 2
    default_error = ErrorCode.ESTIMATION_ERROR


class ProtocolAbort(QKDError):
    exit_code = 3
    default_error = ErrorCode.PROTOCOL_ABORT


class VerificationFailed(ProtocolAbort):
    default_error = ErrorCode.VERIFICATION_FAILED


class KeyExhaustedError(QKDError):
    exit_code = 4
    default_error = ErrorCode.KEY_EXHAUSTED


class LedgerConflictError(QKDError):
    exit_code = 5
    default_error = ErrorCode.LEDGER_CONFLICT


class NonceReuseError(QKDError):
    exit_code = 5
    default_error = ErrorCode.NONCE_REUSE


class AuthenticationError(QKDError):
    exit_code = 1
    default_error = ErrorCode.AUTH_FAILED
