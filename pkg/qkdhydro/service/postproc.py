import json
import math
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from scipy.linalg import matmul_toeplitz
from scipy.stats import beta

from qkdhydro.common.exception import DomainError, LengthMismatchError, VerificationFailed
from qkdhydro.models import BitString
from qkdhydro.schema import SecureKey, SiftedKeyPair
from qkdhydro.service.bitops import binary_entropy

# Hamming(7,4), positions 1..7: parity at 1, 2, 4; data d1..d4 at 3, 5, 7, 6
DATA_POSITIONS = np.array([2, 4, 6, 5])
PARITY_POSITIONS = np.array([0, 1, 3])
# column j checks position j + 1, row r holds bit r of that position
PARITY_CHECK = np.array([[((j + 1) >> r) & 1 for j in range(7)] for r in range(3)], dtype=np.uint8)
BLOCK_DATA = 4
BLOCK_WORD = 7


# 1. Parameter estimation
def disclose_sample(pair: SiftedKeyPair, sample_fraction: float, rng) -> Tuple[int, int, SiftedKeyPair]:
    """Reveal ceil(fraction * n) random positions; returns (errors, sample size, remaining pair)."""
    if len(pair) == 0:
        raise DomainError("Cannot estimate the QBER of an empty key")
    if not 0.0 < sample_fraction <= 1.0:
        raise DomainError(f"sample_fraction must lie in (0, 1], got {sample_fraction}")
    n = len(pair)
    size = min(n, math.ceil(round(sample_fraction * n, 9)))
    disclosed = np.zeros(n, dtype=bool)
    disclosed[rng.choice(n, size=size, replace=False)] = True
    alice, bob = pair.alice.bits, pair.bob.bits
    errors = int(np.count_nonzero(alice[disclosed] != bob[disclosed]))
    remaining = SiftedKeyPair(BitString(alice[~disclosed]), BitString(bob[~disclosed]))
    return errors, size, remaining


def estimate_qber(pair: SiftedKeyPair, sample_fraction: float, rng) -> Tuple[float, SiftedKeyPair]:
    errors, size, remaining = disclose_sample(pair, sample_fraction, rng)
    return errors / size, remaining


def qber_upper_bound(errors: int, sample: int, confidence: float = 0.95) -> float:
    """One-sided Clopper-Pearson upper bound on the QBER."""
    if sample <= 0 or errors >= sample:
        return 1.0
    return float(beta.ppf(confidence, errors + 1, sample - errors))


def abort_check(qber: float, threshold: float) -> bool:
    """True when the session must abort; a QBER equal to the threshold passes."""
    for name, value in (("qber", qber), ("threshold", threshold)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value}", field=name)
    aborted = bool(qber > threshold)
    logger.debug(json.dumps({"event": "abort_check", "qber": qber, "threshold": threshold, "aborted": aborted}))
    return aborted


# 2. Hamming(7,4)
def _encode_blocks(data: np.ndarray) -> np.ndarray:
    words = np.zeros((data.shape[0], BLOCK_WORD), dtype=np.uint8)
    words[:, DATA_POSITIONS] = data
    for r, position in enumerate(PARITY_POSITIONS):
        words[:, position] = (words.astype(np.int64) @ PARITY_CHECK[r]) % 2
    return words


def _decode_blocks(words: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    bits = (words.astype(np.int64) @ PARITY_CHECK.T.astype(np.int64)) % 2
    syndrome = bits @ (1 << np.arange(3))
    fixed = words.copy()
    rows = np.nonzero(syndrome)[0]
    fixed[rows, syndrome[rows] - 1] ^= 1
    return fixed[:, DATA_POSITIONS], syndrome


def hamming74_encode(data: BitString) -> BitString:
    if len(data) != BLOCK_DATA:
        raise LengthMismatchError(f"Hamming(7,4) encodes 4 bits, got {len(data)}", expected=4, actual=len(data))
    return BitString(_encode_blocks(data.bits.reshape(1, BLOCK_DATA))[0])


def hamming74_decode(word: BitString) -> Tuple[BitString, Optional[int]]:
    """Returns the data bits and the 1-based position that was corrected, if any."""
    if len(word) != BLOCK_WORD:
        raise LengthMismatchError(f"Hamming(7,4) decodes 7 bits, got {len(word)}", expected=7, actual=len(word))
    data, syndrome = _decode_blocks(word.bits.reshape(1, BLOCK_WORD))
    position = int(syndrome[0])
    return BitString(data[0]), position or None


def correct_errors(pair: SiftedKeyPair) -> Tuple[SiftedKeyPair, int]:
    """Blockwise Hamming(7,4) reconciliation; Alice's 3 parity bits per block are the leak.

    The trailing partial block is disclosed and dropped.
    """
    blocks = len(pair) // BLOCK_DATA
    if blocks == 0:
        return SiftedKeyPair.empty(), 0
    usable = blocks * BLOCK_DATA
    alice = pair.alice.bits[:usable].reshape(blocks, BLOCK_DATA)
    bob = pair.bob.bits[:usable].reshape(blocks, BLOCK_DATA)
    parity = _encode_blocks(alice)[:, PARITY_POSITIONS]
    received = np.zeros((blocks, BLOCK_WORD), dtype=np.uint8)
    received[:, DATA_POSITIONS] = bob
    received[:, PARITY_POSITIONS] = parity
    corrected, syndrome = _decode_blocks(received)
    leaked = PARITY_POSITIONS.size * blocks
    corrections = int(np.count_nonzero(syndrome))
    logger.debug(json.dumps({"event": "error_correction", "blocks": blocks, "corrections": corrections}))
    return SiftedKeyPair(BitString(alice.ravel()), BitString(corrected.ravel())), leaked


# 3. Hashing
def pair_hash(key: BitString) -> BitString:
    """XOR of each adjacent pair: 00 -> 0, 01 -> 1, 10 -> 1, 11 -> 0."""
    if len(key) % 2:
        raise DomainError(f"Pair hash needs an even number of bits, got {len(key)}", length=len(key))
    groups = key.bits.reshape(-1, 2)
    return BitString(groups[:, 0] ^ groups[:, 1])


def toeplitz_hash(key: BitString, target_length: int, hash_seed: BitString) -> BitString:
    """Product of the seed-defined binary Toeplitz matrix with the key, mod 2.

    The first ``target_length`` seed bits form the first column, the rest extend
    the first row.
    """
    n = len(key)
    if not 0 < target_length <= n:
        raise DomainError(f"Target length must lie in (0, {n}], got {target_length}", target_length=target_length)
    needed = n + target_length - 1
    if len(hash_seed) < needed:
        raise LengthMismatchError(
            f"Hash seed needs {needed} bits, got {len(hash_seed)}", expected=needed, actual=len(hash_seed)
        )
    seed = hash_seed.bits[:needed].astype(np.float64)
    column = seed[:target_length]
    row = np.concatenate([seed[:1], seed[target_length:]])
    product = matmul_toeplitz((column, row), key.bits.astype(np.float64))
    return BitString(np.rint(product).astype(np.int64) % 2)


def privacy_amplify(
    key: BitString,
    target_length: int,
    hash_seed: BitString,
    epsilon_sec: float = 1e-9,
    provenance: str = "",
) -> SecureKey:
    return SecureKey(
        bits=toeplitz_hash(key, target_length, hash_seed),
        epsilon_sec=epsilon_sec,
        provenance=provenance,
    )


def verification_width(epsilon_cor: float, n: int) -> int:
    if not 0.0 < epsilon_cor < 1.0:
        raise DomainError(f"epsilon_cor must lie in (0, 1), got {epsilon_cor}")
    return min(n, math.ceil(math.log2(1.0 / epsilon_cor)))


def verify_correction(pair: SiftedKeyPair, epsilon_cor: float, hash_seed: BitString) -> bool:
    """Compares Toeplitz hashes of both keys; raises VerificationFailed on mismatch."""
    width = verification_width(epsilon_cor, len(pair))
    if width == 0:
        return True
    if toeplitz_hash(pair.alice, width, hash_seed) != toeplitz_hash(pair.bob, width, hash_seed):
        raise VerificationFailed(bits=width)
    return True


# 4. Reconciliation
def _permuted(pair: SiftedKeyPair, order: np.ndarray) -> SiftedKeyPair:
    return SiftedKeyPair(BitString(pair.alice.bits[order]), BitString(pair.bob.bits[order]))


def reconcile(
    pair: SiftedKeyPair, epsilon_cor: float, rng: np.random.Generator, max_passes: int = 16
) -> Tuple[SiftedKeyPair, int, int]:
    """Hamming(7,4) passes over fresh shared permutations until the verification hashes agree.

    Returns (corrected pair, leaked bits, passes). Every pass leaks its parity bits and
    every failed check its hash bits. Raises VerificationFailed after ``max_passes``.
    """
    if max_passes < 1:
        raise DomainError(f"max_passes must be >= 1, got {max_passes}")
    corrected, leaked = correct_errors(pair)
    n = len(corrected)
    if n == 0:
        return corrected, leaked, 1
    width = verification_width(epsilon_cor, n)
    for passes in range(1, max_passes + 1):
        try:
            verify_correction(corrected, epsilon_cor, BitString.random(rng, n + width - 1))
        except VerificationFailed:
            leaked += width
        else:
            logger.debug(json.dumps({"event": "reconciled", "passes": passes, "leaked": leaked}))
            return corrected, leaked, passes
        if passes == max_passes:
            break
        # n is a multiple of the block size after the first pass, so nothing more is dropped
        order = rng.permutation(n)
        shuffled, parity = correct_errors(_permuted(corrected, order))
        corrected = _permuted(shuffled, np.argsort(order))
        leaked += parity
    raise VerificationFailed(f"Keys still differ after {max_passes} reconciliation passes", passes=max_passes)


# 5. Leak accounting
def leak_accounting(n: float, qber: float, efficiency_f: float = 1.16) -> int:
    """Leak_EC = ceil(f n h(qber))."""
    if n < 0:
        raise DomainError(f"Sifted bit count must be >= 0, got {n}")
    if not 0.0 <= qber <= 0.5:
        raise DomainError(f"qber must lie in [0, 0.5], got {qber}")
    if efficiency_f < 1.0:
        raise DomainError(f"Reconciliation efficiency must be >= 1, got {efficiency_f}")
    return int(math.ceil(efficiency_f * n * binary_entropy(qber)))


__all__ = [
    "disclose_sample",
    "estimate_qber",
    "qber_upper_bound",
    "abort_check",
    "hamming74_encode",
    "hamming74_decode",
    "correct_errors",
    "pair_hash",
    "toeplitz_hash",
    "privacy_amplify",
    "verification_width",
    "verify_correction",
    "reconcile",
    "leak_accounting",
]
