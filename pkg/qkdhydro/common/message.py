from enum import Enum


class ErrorCode(str, Enum):
    SUCCESS = "SUCCESS"
    ENCODING_ERROR = "ENCODING_ERROR"
    LENGTH_MISMATCH = "LENGTH_MISMATCH"
    DOMAIN_ERROR = "DOMAIN_ERROR"
    DEGENERATE_CHANNEL = "DEGENERATE_CHANNEL"
    CONFIG_ERROR = "CONFIG_ERROR"
    ESTIMATION_ERROR = "ESTIMATION_ERROR"
    PROTOCOL_ABORT = "PROTOCOL_ABORT"
    VERIFICATION_FAILED = "VERIFICATION_FAILED"
    KEY_EXHAUSTED = "KEY_EXHAUSTED"
    LEDGER_CONFLICT = "LEDGER_CONFLICT"
    NONCE_REUSE = "NONCE_REUSE"
    AUTH_FAILED = "AUTH_FAILED"
    SERVER_ERROR = "SERVER_ERROR"


MessageResponse = {
    "en": {
        ErrorCode.SUCCESS: "Success",
        ErrorCode.ENCODING_ERROR: "Input cannot be encoded as 7-bit ASCII",
        ErrorCode.LENGTH_MISMATCH: "Bit strings have different lengths",
        ErrorCode.DOMAIN_ERROR: "Argument outside the valid domain",
        ErrorCode.DEGENERATE_CHANNEL: "Channel has errors but no detections",
        ErrorCode.CONFIG_ERROR: "Invalid scenario configuration",
        ErrorCode.ESTIMATION_ERROR: "Decoy intensities do not allow estimation",
        ErrorCode.PROTOCOL_ABORT: "QBER above threshold, protocol aborted",
        ErrorCode.VERIFICATION_FAILED: "Error verification failed, keys differ",
        ErrorCode.KEY_EXHAUSTED: "Not enough unused key material",
        ErrorCode.LEDGER_CONFLICT: "Key ledger is inconsistent with the request",
        ErrorCode.NONCE_REUSE: "Nonce already used in this session",
        ErrorCode.AUTH_FAILED: "Authentication tag rejected",
        ErrorCode.SERVER_ERROR: "Unexpected error, see the log file",
    },
    "vi": {
        ErrorCode.SUCCESS: "Thành công",
        ErrorCode.ENCODING_ERROR: "Dữ liệu không mã hóa được bằng ASCII 7 bit",
        ErrorCode.LENGTH_MISMATCH: "Hai chuỗi bit có độ dài khác nhau",
        ErrorCode.DOMAIN_ERROR: "Tham số nằm ngoài miền hợp lệ",
        ErrorCode.DEGENERATE_CHANNEL: "Kênh có lỗi nhưng không có lượt phát hiện",
        ErrorCode.CONFIG_ERROR: "Cấu hình kịch bản không hợp lệ",
        ErrorCode.ESTIMATION_ERROR: "Cường độ decoy không cho phép ước lượng",
        ErrorCode.PROTOCOL_ABORT: "QBER vượt ngưỡng, giao thức bị hủy",
        ErrorCode.VERIFICATION_FAILED: "Kiểm tra lỗi thất bại, hai khóa khác nhau",
        ErrorCode.KEY_EXHAUSTED: "Không đủ khóa chưa sử dụng",
        ErrorCode.LEDGER_CONFLICT: "Sổ khóa không khớp với yêu cầu",
        ErrorCode.NONCE_REUSE: "Nonce đã được dùng trong phiên này",
        ErrorCode.AUTH_FAILED: "Thẻ xác thực không hợp lệ",
        ErrorCode.SERVER_ERROR: "Lỗi hệ thống, xem file log",
    },
}


def get_message(key: ErrorCode, lang: str = "en") -> str:
    return MessageResponse.get(lang, MessageResponse["en"]).get(key, "")
