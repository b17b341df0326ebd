import math

import numpy as np
import pytest

from qkdhydro.common.exception import DomainError, LengthMismatchError
from qkdhydro.models import Basis, BitString, PolarizationState
from qkdhydro.service.protocol import Session, measure, prepare, sift


class WalkthroughRng:
    """Mismatched bases read 0, matched bases never flip."""

    def integers(self, low, high=None, size=None):
        return 0

    def random(self, size=None):
        return 0.5


@pytest.mark.parametrize(
    "bit, basis, state",
    [
        (0, Basis.Z, PolarizationState.ZERO),
        (1, Basis.Z, PolarizationState.ONE),
        (0, Basis.X, PolarizationState.PLUS),
        (1, Basis.X, PolarizationState.MINUS),
    ],
)
def test_prepare(bit, basis, state):
    assert prepare(bit, basis) == state
    assert state.basis == basis
    assert state.bit == bit


def test_measure_matching_basis():
    rng = WalkthroughRng()
    assert measure(PolarizationState.ONE, Basis.Z, rng, 0.0) == 1
    assert measure(PolarizationState.ONE, Basis.Z, rng, 1.0) == 0


def test_measure_rejects_bad_flip_probability():
    with pytest.raises(DomainError):
        measure(PolarizationState.ZERO, Basis.Z, WalkthroughRng(), 1.2)


def test_walkthrough_sifting():
    rng = WalkthroughRng()
    alice_bits = BitString.from_str("110")
    alice_bases = [Basis.Z, Basis.X, Basis.Z]
    bob_bases = [Basis.Z, Basis.Z, Basis.Z]
    bob_bits = BitString(
        measure(prepare(bit, a), b, rng, 0.0) for bit, a, b in zip(alice_bits, alice_bases, bob_bases)
    )
    assert bob_bits == BitString.from_str("100")
    alice_sifted, bob_sifted = sift(alice_bases, bob_bases, bob_bits, alice_bits)
    assert str(alice_sifted) == "10"
    assert str(bob_sifted) == "10"


def test_sift_length_mismatch():
    with pytest.raises(LengthMismatchError):
        sift([Basis.Z], [Basis.Z, Basis.X], BitString.from_str("1"), BitString.from_str("1"))


def test_sift_accepts_arrays():
    alice, bob = sift(np.array([0, 1, 1]), np.array([0, 0, 1]), np.array([1, 1, 0]), np.array([1, 0, 0]))
    assert str(alice) == "10"
    assert str(bob) == "10"


def test_session_noiseless_exchange_agrees():
    alice, bob = Session(seed=11).exchange(20_000)
    assert alice == bob
    # sifting keeps each pulse with probability 1/2
    assert abs(len(alice) - 10_000) <= 5 * math.sqrt(20_000 * 0.25)


def test_session_is_seeded():
    first = Session(seed=5).exchange(500, flip_probability=0.1)
    second = Session(seed=5).exchange(500, flip_probability=0.1)
    assert first == second


def test_session_prepare_pulses_follow_probabilities():
    pulses = Session(seed=3, intensity_probabilities=(0.0, 1.0, 0.0)).prepare_pulses(50)
    assert {pulse.intensity_class.value for pulse in pulses} == {"decoy"}


@pytest.mark.parametrize("state", list(PolarizationState))
def test_mismatched_basis_outcome_is_a_fair_coin(state):
    rng = np.random.default_rng(17)
    other = Basis.X if state.basis == Basis.Z else Basis.Z
    ones = sum(measure(state, other, rng, 0.0) for _ in range(4000))
    assert abs(ones - 2000) <= 5 * math.sqrt(4000 * 0.25)


@pytest.mark.parametrize("state", list(PolarizationState))
def test_matching_basis_without_noise_reads_the_prepared_bit(state):
    rng = np.random.default_rng(18)
    assert {measure(state, state.basis, rng, 0.0) for _ in range(200)} == {state.bit}
