import itertools
import math

import numpy as np
import pytest
from scipy.linalg import toeplitz

from qkdhydro.common.exception import DomainError, LengthMismatchError, VerificationFailed
from qkdhydro.models import BitString
from qkdhydro.schema import SiftedKeyPair
from qkdhydro.service.postproc import (
    abort_check,
    correct_errors,
    disclose_sample,
    estimate_qber,
    hamming74_decode,
    hamming74_encode,
    leak_accounting,
    pair_hash,
    privacy_amplify,
    qber_upper_bound,
    reconcile,
    toeplitz_hash,
    verification_width,
    verify_correction,
)

DATA_WORDS = ["".join(bits) for bits in itertools.product("01", repeat=4)]


def _flip(bits: BitString, positions) -> BitString:
    array = bits.bits.copy()
    array[list(positions)] ^= 1
    return BitString(array)


def test_hamming_known_words():
    assert str(hamming74_encode(BitString.from_str("1101"))) == "0010110"
    assert str(hamming74_encode(BitString.from_str("1111"))) == "1111111"
    assert str(hamming74_encode(BitString.from_str("0000"))) == "0000000"


def test_hamming_decode_single_error():
    data, position = hamming74_decode(BitString.from_str("0010100"))
    assert str(data) == "1101"
    assert position == 6


@pytest.mark.parametrize("word", DATA_WORDS)
def test_hamming_corrects_every_single_flip(word):
    data = BitString.from_str(word)
    codeword = hamming74_encode(data)
    assert hamming74_decode(codeword) == (data, None)
    for i in range(7):
        assert hamming74_decode(_flip(codeword, [i])) == (data, i + 1)


def test_hamming_lengths():
    with pytest.raises(LengthMismatchError):
        hamming74_encode(BitString.from_str("101"))
    with pytest.raises(LengthMismatchError):
        hamming74_decode(BitString.from_str("101"))


def test_correct_errors_fixes_one_error_per_block(rng):
    alice = BitString.random(rng, 402)
    flips = [4 * block + int(rng.integers(0, 4)) for block in range(0, 100, 3)]
    corrected, leaked = correct_errors(SiftedKeyPair(alice, _flip(alice, flips)))
    assert len(corrected) == 400
    assert corrected.matches
    assert corrected.alice == alice[:400]
    assert leaked == 300


def test_correct_errors_short_key():
    corrected, leaked = correct_errors(SiftedKeyPair(BitString.from_str("101"), BitString.from_str("100")))
    assert len(corrected) == 0
    assert leaked == 0


def test_pair_hash():
    assert str(pair_hash(BitString.from_str("1011010101"))) == "10111"
    table = {"00": "0", "01": "1", "10": "1", "11": "0"}
    for group, out in table.items():
        assert str(pair_hash(BitString.from_str(group))) == out
    with pytest.raises(DomainError):
        pair_hash(BitString.from_str("101"))


def test_toeplitz_hand_case():
    out = toeplitz_hash(BitString([1, 0, 1]), 2, BitString([1, 0, 1, 1]))
    assert str(out) == "01"


def test_toeplitz_matches_dense_product(rng):
    key = BitString.random(rng, 300)
    seed = BitString.random(rng, 300 + 80 - 1)
    column = seed.bits[:80]
    row = np.concatenate([seed.bits[:1], seed.bits[80:]])
    dense = toeplitz(column, row).astype(np.int64) @ key.bits.astype(np.int64) % 2
    assert toeplitz_hash(key, 80, seed) == BitString(dense)


def test_toeplitz_domain():
    key = BitString.from_str("1010")
    with pytest.raises(DomainError):
        toeplitz_hash(key, 0, BitString.zeros(10))
    with pytest.raises(DomainError):
        toeplitz_hash(key, 5, BitString.zeros(10))
    with pytest.raises(LengthMismatchError):
        toeplitz_hash(key, 3, BitString.zeros(5))


def test_privacy_amplify_same_input_same_key(rng):
    key = BitString.random(rng, 1000)
    seed = BitString.random(rng, 1000 + 200 - 1)
    first = privacy_amplify(key, 200, seed, provenance="test")
    second = privacy_amplify(key, 200, seed)
    assert len(first) == 200
    assert first.bits == second.bits
    assert first.epsilon_sec == 1e-9


def test_privacy_amplify_is_linear_over_gf2(rng):
    seed = BitString.random(rng, 1000 + 200 - 1)
    for _ in range(20):
        a, b = BitString.random(rng, 1000), BitString.random(rng, 1000)
        combined = privacy_amplify(a ^ b, 200, seed).bits
        assert combined == privacy_amplify(a, 200, seed).bits ^ privacy_amplify(b, 200, seed).bits


def test_privacy_amplify_maps_all_zero_key_to_zeros(rng):
    seed = BitString.random(rng, 1000 + 200 - 1)
    assert privacy_amplify(BitString.zeros(1000), 200, seed).bits == BitString.zeros(200)


def test_disclose_sample(rng):
    alice = BitString.random(rng, 1000)
    pair = SiftedKeyPair(alice, _flip(alice, range(0, 1000, 10)))
    errors, size, remaining = disclose_sample(pair, 0.1, rng)
    assert size == 100
    assert len(remaining) == 900
    assert errors + remaining.mismatches == 100


def test_estimate_qber_noiseless(rng):
    alice = BitString.random(rng, 500)
    qber, remaining = estimate_qber(SiftedKeyPair(alice, alice), 0.2, rng)
    assert qber == 0.0
    assert len(remaining) == 400


def test_disclose_sample_empty(rng):
    with pytest.raises(DomainError):
        disclose_sample(SiftedKeyPair.empty(), 0.1, rng)


def test_qber_upper_bound():
    assert qber_upper_bound(0, 100, 0.95) == pytest.approx(1 - 0.05 ** (1 / 100), rel=1e-9)
    assert qber_upper_bound(5, 100) > 0.05
    assert qber_upper_bound(0, 0) == 1.0


def test_abort_check():
    assert abort_check(0.11, 0.11) is False
    assert abort_check(0.12, 0.11) is True
    assert abort_check(0.0, 0.11) is False
    with pytest.raises(DomainError):
        abort_check(1.2, 0.11)


def test_verification(rng):
    alice = BitString.random(rng, 2000)
    seed = BitString.random(rng, 2000 + 50 - 1)
    assert verification_width(1e-15, 2000) == 50
    assert verify_correction(SiftedKeyPair(alice, alice), 1e-15, seed) is True
    with pytest.raises(VerificationFailed):
        verify_correction(SiftedKeyPair(alice, _flip(alice, [17])), 1e-15, seed)


def test_leak_accounting():
    assert leak_accounting(1000, 0.11, 1.16) == 580
    assert leak_accounting(1000, 0.0) == 0
    assert leak_accounting(1000, 0.5, 1.0) == 1000
    with pytest.raises(DomainError):
        leak_accounting(1000, 0.11, 0.9)
    with pytest.raises(DomainError):
        leak_accounting(-1, 0.11)


def test_leak_grows_with_qber():
    leaks = [leak_accounting(10_000, q) for q in np.linspace(0, 0.5, 11)]
    assert leaks == sorted(leaks)
    assert math.isclose(leaks[-1], math.ceil(1.16 * 10_000))


def _noisy_pair(rng, n: int, flip_rate: float) -> SiftedKeyPair:
    alice = BitString.random(rng, n)
    flips = np.nonzero(rng.random(n) < flip_rate)[0]
    return SiftedKeyPair(alice, _flip(alice, flips))


def test_reconcile_noiseless_needs_one_pass(rng):
    alice = BitString.random(rng, 402)
    corrected, leaked, passes = reconcile(SiftedKeyPair(alice, alice), 1e-15, rng)
    assert corrected.matches
    assert len(corrected) == 400
    assert (leaked, passes) == (300, 1)


def test_reconcile_counts_parity_and_failed_checks_per_pass(rng):
    alice = BitString.random(rng, 400)
    # two errors in one block defeat a single Hamming(7,4) pass
    pair = SiftedKeyPair(alice, _flip(alice, [0, 1]))
    with pytest.raises(VerificationFailed):
        reconcile(pair, 1e-15, np.random.default_rng(5), max_passes=1)
    corrected, leaked, passes = reconcile(pair, 1e-15, np.random.default_rng(5))
    assert corrected.matches
    assert corrected.alice == alice
    assert passes >= 2
    assert leaked == 300 * passes + 50 * (passes - 1)


def test_reconcile_empty_and_pass_limit(rng):
    corrected, leaked, passes = reconcile(SiftedKeyPair.empty(), 1e-15, rng)
    assert (len(corrected), leaked, passes) == (0, 0, 1)
    with pytest.raises(DomainError):
        reconcile(SiftedKeyPair.empty(), 1e-15, rng, max_passes=0)


@pytest.mark.parametrize("flip_rate", [0.01, 0.05])
def test_reconciled_sessions_end_with_identical_keys(flip_rate):
    identical = 0
    for trial in range(100):
        rng = np.random.default_rng([round(flip_rate * 1000), trial])
        corrected, _, _ = reconcile(_noisy_pair(rng, 20_000, flip_rate), 1e-15, rng)
        seed = BitString.random(rng, len(corrected) + 1000 - 1)
        alice_key = privacy_amplify(corrected.alice, 1000, seed)
        bob_key = privacy_amplify(corrected.bob, 1000, seed)
        identical += alice_key.bits == bob_key.bits
    assert identical >= 99
