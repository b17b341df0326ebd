from typing import List, Sequence, Tuple

import numpy as np

from qkdhydro.common.exception import DomainError, LengthMismatchError
from qkdhydro.models import Basis, BitString, IntensityClass, PolarizationState, PulseDescriptor

_STATES = {
    (0, Basis.Z): PolarizationState.ZERO,
    (1, Basis.Z): PolarizationState.ONE,
    (0, Basis.X): PolarizationState.PLUS,
    (1, Basis.X): PolarizationState.MINUS,
}
# numeric basis codes used by the vectorised paths
BASIS_CODE = {Basis.Z: 0, Basis.X: 1}
CODE_BASIS = (Basis.Z, Basis.X)


def prepare(bit: int, basis: Basis) -> PolarizationState:
    return _STATES[(int(bit), Basis(basis))]


def measure(state: PolarizationState, basis: Basis, rng, flip_probability: float) -> int:
    """Bob's measurement.

    A matching basis consumes one ``rng.random()`` to decide the channel flip; a
    mismatched basis consumes one ``rng.integers(0, 2)`` for the random outcome.
    """
    if not 0.0 <= flip_probability <= 1.0:
        raise DomainError(f"flip_probability must lie in [0, 1], got {flip_probability}")
    if state.basis == Basis(basis):
        flipped = rng.random() < flip_probability
        return state.bit ^ int(flipped)
    return int(rng.integers(0, 2))


def basis_codes(bases) -> np.ndarray:
    if isinstance(bases, np.ndarray):
        return bases.astype(np.uint8)
    return np.fromiter((BASIS_CODE[Basis(b)] for b in bases), dtype=np.uint8)


def _bits(values) -> np.ndarray:
    return values.bits if isinstance(values, BitString) else np.asarray(values, dtype=np.uint8)


def sift(
    alice_bases: Sequence[Basis] | np.ndarray,
    bob_bases: Sequence[Basis] | np.ndarray,
    bob_bits: BitString | np.ndarray,
    alice_bits: BitString | np.ndarray,
) -> Tuple[BitString, BitString]:
    a_bases, b_bases = basis_codes(alice_bases), basis_codes(bob_bases)
    a_bits, b_bits = _bits(alice_bits), _bits(bob_bits)
    lengths = {len(a_bases), len(b_bases), len(a_bits), len(b_bits)}
    if len(lengths) != 1:
        raise LengthMismatchError(
            "Sifting needs equally long bases and bits",
            alice_bases=len(a_bases),
            bob_bases=len(b_bases),
            alice_bits=len(a_bits),
            bob_bits=len(b_bits),
        )
    keep = a_bases == b_bases
    return BitString(a_bits[keep]), BitString(b_bits[keep])


class Session:
    """Single-owner BB84 session driven by one seeded generator.

    Draw order for a batch of pulses: intensity classes, Alice's bits, Alice's
    bases, Bob's bases, then one measurement draw per pulse.
    """

    def __init__(
        self,
        seed: int | None = None,
        rng: np.random.Generator | None = None,
        basis_probability_x: float = 0.5,
        intensity_probabilities: Sequence[float] = (1.0, 0.0, 0.0),
    ):
        if not 0.0 <= basis_probability_x <= 1.0:
            raise DomainError("basis_probability_x must lie in [0, 1]")
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.basis_probability_x = basis_probability_x
        self.intensity_probabilities = np.asarray(intensity_probabilities, dtype=np.float64)

    def draw_bases(self, n: int) -> np.ndarray:
        return (self.rng.random(n) < self.basis_probability_x).astype(np.uint8)

    def prepare_pulses(self, n: int) -> List[PulseDescriptor]:
        classes = self.rng.choice(len(IntensityClass), size=n, p=self.intensity_probabilities)
        bits = self.rng.integers(0, 2, size=n)
        bases = self.draw_bases(n)
        members = list(IntensityClass)
        return [
            PulseDescriptor(bit=int(bit), basis=CODE_BASIS[basis], intensity_class=members[cls])
            for cls, bit, basis in zip(classes, bits, bases)
        ]

    def transmit(
        self,
        pulses: Sequence[PulseDescriptor],
        bob_bases: Sequence[Basis],
        flip_probability: float = 0.0,
    ) -> BitString:
        if len(pulses) != len(bob_bases):
            raise LengthMismatchError(pulses=len(pulses), bob_bases=len(bob_bases))
        return BitString(
            measure(prepare(pulse.bit, pulse.basis), basis, self.rng, flip_probability)
            for pulse, basis in zip(pulses, bob_bases)
        )

    def exchange(self, n: int, flip_probability: float = 0.0) -> Tuple[BitString, BitString]:
        """Prepare, measure and sift ``n`` pulses; returns (alice_sifted, bob_sifted)."""
        pulses = self.prepare_pulses(n)
        bob_bases = [CODE_BASIS[b] for b in self.draw_bases(n)]
        bob_bits = self.transmit(pulses, bob_bases, flip_probability)
        alice_bits = BitString(pulse.bit for pulse in pulses)
        return sift([p.basis for p in pulses], bob_bases, bob_bits, alice_bits)
