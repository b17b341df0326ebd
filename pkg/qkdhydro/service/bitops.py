import numpy as np

from qkdhydro.common.exception import DomainError, EncodingError
from qkdhydro.models import BitString

ASCII7_WIDTH = 7
# MSB first: 'd' -> 1100100
_ASCII7_WEIGHTS = 1 << np.arange(ASCII7_WIDTH - 1, -1, -1)


def encode_ascii7(text: str) -> BitString:
    bad = next((i for i, c in enumerate(text) if ord(c) > 127), None)
    if bad is not None:
        raise EncodingError(
            f"Character {text[bad]!r} at position {bad} has no 7-bit ASCII code",
            position=bad,
        )
    codes = np.fromiter((ord(c) for c in text), dtype=np.int64, count=len(text))
    bits = (codes[:, None] >> np.arange(ASCII7_WIDTH - 1, -1, -1)) & 1
    return BitString(bits.ravel())


def decode_ascii7(bits: BitString) -> str:
    if bits.length % ASCII7_WIDTH:
        raise EncodingError(
            f"{bits.length} bits do not split into 7-bit characters",
            length=bits.length,
        )
    codes = bits.bits.reshape(-1, ASCII7_WIDTH).astype(np.int64) @ _ASCII7_WEIGHTS
    return "".join(chr(code) for code in codes)


def xor(a: BitString, b: BitString) -> BitString:
    return a ^ b


def binary_entropy(p):
    """h(p) = -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0.

    Accepts a scalar or a numpy array; scalars give a float back.
    """
    values = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(values)) or np.any((values < 0) | (values > 1)):
        raise DomainError(f"Binary entropy needs p in [0, 1], got {p}")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -values * np.log2(values) - (1 - values) * np.log2(1 - values)
    h = np.where((values == 0) | (values == 1), 0.0, h)
    if h.ndim == 0:
        return float(h)
    return h
