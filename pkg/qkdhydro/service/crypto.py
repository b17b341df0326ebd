import json
import weakref
from typing import Iterable, Optional, Tuple

import numpy as np
from loguru import logger

from qkdhydro.common.exception import AuthenticationError, DomainError, NonceReuseError
from qkdhydro.db import KeyStore
from qkdhydro.models import AllocationPurpose, BitString, CipherMode
from qkdhydro.schema import NONCE_WIDTH, TAG_WIDTH, AuthenticatedMessage, PlanReport

# x^64 + x^4 + x^3 + x + 1
GF64_REDUCTION = 0x1B
GF64_MASK = (1 << 64) - 1


# 1. One-time pad
def otp_encrypt(
    message: BitString, store: KeyStore, purpose: str = AllocationPurpose.OTP.value
) -> Tuple[BitString, KeyStore]:
    """XOR with fresh key bits; the store records the allocation under ``purpose``."""
    if len(message) == 0:
        return BitString(), store
    _, key_bits = store.allocate(len(message), purpose)
    return message ^ key_bits, store


def otp_decrypt(ciphertext: BitString, key_bits: BitString) -> BitString:
    return ciphertext ^ key_bits


# 2. Authentication
def _to_int(bits: BitString) -> int:
    return int(str(bits), 2) if len(bits) else 0


def _from_int(value: int, width: int) -> BitString:
    return BitString.from_str(format(value, f"0{width}b"))


def gf64_mul(a: int, b: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        carry = a >> 63
        a = (a << 1) & GF64_MASK
        if carry:
            a ^= GF64_REDUCTION
    return result


def _blocks(message: BitString) -> Iterable[int]:
    bits = message.bits
    for start in range(0, len(bits), TAG_WIDTH):
        chunk = bits[start : start + TAG_WIDTH]
        padded = np.zeros(TAG_WIDTH, dtype=np.uint8)
        padded[: chunk.size] = chunk
        yield _to_int(BitString(padded))


def compute_tag(message: BitString, hash_key: BitString, mask: BitString, nonce: BitString) -> BitString:
    """Polynomial hash over GF(2^64) of (nonce, payload blocks, length), masked once."""
    widths = (("hash key", hash_key, TAG_WIDTH), ("mask", mask, TAG_WIDTH), ("nonce", nonce, NONCE_WIDTH))
    for name, value, width in widths:
        if len(value) != width:
            raise DomainError(f"The {name} must be {width} bits, got {len(value)}", field=name)
    key = _to_int(hash_key)
    if key == 0:
        raise DomainError("A zero hash key authenticates nothing", field="hash key")
    acc = 0
    for block in (_to_int(nonce), *_blocks(message), len(message) & GF64_MASK):
        acc = gf64_mul(acc ^ block, key)
    return _from_int(acc ^ _to_int(mask), TAG_WIDTH)


def verify_tag(message: AuthenticatedMessage, hash_key: BitString, mask: BitString) -> bool:
    return compute_tag(message.payload, hash_key, mask, message.nonce) == message.tag


class AuthSession:
    """Tags messages under one hash key; each tag consumes a fresh 64-bit mask.

    Nonces come from ``rng``, else from a generator seeded with ``seed``, else from
    one seeded with the hash key, so a session over the same key bits repeats its nonces.
    """

    def __init__(self, store: KeyStore, rng: Optional[np.random.Generator] = None, seed: Optional[int] = None):
        self.store = store
        self.nonce_log: set[BitString] = set()
        self.key_allocation, self.hash_key = store.allocate(TAG_WIDTH, AllocationPurpose.AUTH_KEY.value)
        if self.hash_key.weight() == 0:
            raise DomainError("Allocated hash key is all zeros")
        if rng is None:
            rng = np.random.default_rng(seed if seed is not None else _to_int(self.hash_key))
        self.rng = rng

    def new_nonce(self) -> BitString:
        return BitString.random(self.rng, NONCE_WIDTH)

    def tag(self, message: BitString, nonce: Optional[BitString] = None) -> AuthenticatedMessage:
        nonce = nonce if nonce is not None else self.new_nonce()
        if nonce in self.nonce_log:
            raise NonceReuseError(nonce=str(nonce))
        allocation, mask = self.store.allocate(TAG_WIDTH, AllocationPurpose.AUTH_MASK.value)
        self.nonce_log.add(nonce)
        return AuthenticatedMessage(
            payload=message,
            nonce=nonce,
            tag=compute_tag(message, self.hash_key, mask, nonce),
            mask_allocation=allocation,
        )

    def verify(self, message: AuthenticatedMessage) -> bool:
        if message.mask_allocation is None:
            return False
        return verify_tag(message, self.hash_key, self.store.read(message.mask_allocation))

    def require_valid(self, message: AuthenticatedMessage) -> AuthenticatedMessage:
        if not self.verify(message):
            raise AuthenticationError()
        return message


_sessions: "weakref.WeakKeyDictionary[KeyStore, AuthSession]" = weakref.WeakKeyDictionary()


def auth_tag(
    message: BitString,
    store: KeyStore,
    nonce: Optional[BitString] = None,
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
) -> AuthenticatedMessage:
    """Tags with the store's session, opening one (and its hash key) on first use.

    ``rng`` and ``seed`` only matter when the session is opened.
    """
    session = _sessions.get(store)
    if session is None:
        session = _sessions[store] = AuthSession(store, rng, seed)
    return session.tag(message, nonce)


# 3. Budget planning
def plan_mode(skr: float, required_bandwidth: float) -> CipherMode:
    """OTP only when the key rate strictly exceeds the traffic to encrypt."""
    if skr < 0 or required_bandwidth < 0:
        raise DomainError("Key rate and bandwidth must be >= 0", skr=skr, bandwidth=required_bandwidth)
    return CipherMode.OTP if skr > required_bandwidth else CipherMode.AUTH_ONLY


def plan(skr: float, required_bandwidth: float) -> PlanReport:
    mode = plan_mode(skr, required_bandwidth)
    logger.debug(json.dumps({"event": "plan", "skr": skr, "bandwidth": required_bandwidth, "mode": mode.value}))
    return PlanReport(
        skr_bps=skr,
        bandwidth_bps=required_bandwidth,
        surplus_bps=skr - required_bandwidth,
        mode=mode,
        description=mode.description(),
    )


__all__ = [
    "otp_encrypt",
    "otp_decrypt",
    "gf64_mul",
    "compute_tag",
    "verify_tag",
    "AuthSession",
    "auth_tag",
    "plan_mode",
    "plan",
]
