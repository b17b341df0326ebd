import json

import numpy as np
import pytest

from qkdhydro.common.exception import DomainError, KeyExhaustedError, LedgerConflictError
from qkdhydro.db import KeyStore, default_ledger_path
from qkdhydro.models import BitString


def test_allocations_are_contiguous(rng):
    store = KeyStore.from_bits(BitString.random(rng, 100))
    first, bits_a = store.allocate(30, "otp")
    second, bits_b = store.allocate(70, "otp")
    assert (first.start_bit, first.end_bit) == (0, 30)
    assert (second.start_bit, second.end_bit) == (30, 100)
    assert BitString.concat(bits_a, bits_b) == BitString.concat(*store.blocks)
    assert store.remaining == 0


def test_exhaustion_is_atomic(rng):
    store = KeyStore.from_bits(BitString.random(rng, 21))
    store.allocate(20, "otp")
    with pytest.raises(KeyExhaustedError):
        store.allocate(2, "otp")
    assert store.consumed_offset == 20
    assert len(store.allocations) == 1


def test_allocate_rejects_empty_request(rng):
    with pytest.raises(DomainError):
        KeyStore.from_bits(BitString.random(rng, 8)).allocate(0, "otp")


def test_random_operations_never_overlap(rng):
    store = KeyStore.from_bits(BitString.random(rng, 5000), BitString.random(rng, 3000))
    purposes = ["otp", "auth-key", "auth-mask"]
    for _ in range(1000):
        n = int(rng.integers(1, 24))
        before = store.consumed_offset
        try:
            allocation, bits = store.allocate(n, purposes[int(rng.integers(0, 3))])
        except KeyExhaustedError:
            assert store.consumed_offset == before
            continue
        assert len(bits) == n
        assert allocation.start_bit == before
    ranges = [(a.start_bit, a.end_bit) for a in store.allocations]
    assert ranges[0][0] == 0
    assert all(end == start for (_, end), (start, _) in zip(ranges, ranges[1:]))
    assert ranges[-1][1] <= store.total_bits


def test_key_file_and_ledger_round_trip(tmp_path):
    key_path = str(tmp_path / "key.hex")
    KeyStore.write_key_file(key_path, [BitString.from_hex("d797c8"), BitString.from_str("1111111")])
    assert (tmp_path / "key.hex").read_text() == "d797c8\nf\n"

    store = KeyStore.load(key_path)
    assert store.total_bits == 28
    allocation, bits = store.allocate(21, "otp:message.txt")
    assert str(bits) == "110101111001011111001"

    ledger = (tmp_path / "key.hex.ledger").read_text().splitlines()
    assert len(ledger) == 1
    assert json.loads(ledger[0])["end_bit"] == 21

    reloaded = KeyStore.load(key_path)
    assert reloaded.consumed_offset == 21
    assert reloaded.find("otp:message.txt") == allocation
    assert reloaded.read(allocation) == bits
    assert default_ledger_path(key_path) == key_path + ".ledger"


def test_ledger_gap_is_a_conflict(tmp_path):
    key_path = tmp_path / "key.hex"
    key_path.write_text("ffff\n")
    line = {"purpose": "otp", "start_bit": 4, "end_bit": 8, "timestamp": "2024-01-01T00:00:00+00:00"}
    (tmp_path / "key.hex.ledger").write_text(json.dumps(line) + "\n")
    with pytest.raises(LedgerConflictError):
        KeyStore.load(str(key_path))


def test_ledger_beyond_material_is_a_conflict(tmp_path):
    key_path = tmp_path / "key.hex"
    key_path.write_text("ff\n")
    line = {"purpose": "otp", "start_bit": 0, "end_bit": 9, "timestamp": "2024-01-01T00:00:00+00:00"}
    (tmp_path / "key.hex.ledger").write_text(json.dumps(line) + "\n")
    with pytest.raises(LedgerConflictError):
        KeyStore.load(str(key_path))


def test_unreadable_ledger_line(tmp_path):
    key_path = tmp_path / "key.hex"
    key_path.write_text("ff\n")
    (tmp_path / "key.hex.ledger").write_text("not json\n")
    with pytest.raises(LedgerConflictError):
        KeyStore.load(str(key_path))


def test_find_missing_purpose(rng):
    with pytest.raises(LedgerConflictError):
        KeyStore.from_bits(BitString.random(rng, 8)).find("otp:nothing")


def test_find_range_matches_exact_allocation(rng):
    store = KeyStore.from_bits(BitString.random(rng, 64))
    first, _ = store.allocate(21, "otp:c.bits")
    second, _ = store.allocate(21, "otp:c.bits")
    assert store.find_range(0, 21) == first
    assert store.find_range(21, 42) == second
    with pytest.raises(LedgerConflictError):
        store.find_range(0, 42)
    with pytest.raises(LedgerConflictError):
        store.find_range(42, 63)


def test_key_file_truncates_to_whole_hex_digits(tmp_path):
    path = str(tmp_path / "k.hex")
    KeyStore.write_key_file(path, [BitString(np.ones(10, dtype=np.uint8))])
    assert (tmp_path / "k.hex").read_text() == "ff\n"
