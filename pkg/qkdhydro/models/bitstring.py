from typing import Iterable, Iterator, Self

import numpy as np

from qkdhydro.common.exception import DomainError, EncodingError, LengthMismatchError


class BitString:
    """Immutable ordered sequence of bits.

    Carrier for keys, messages and ciphertexts. The textual form is a run of
    '0'/'1' characters; single spaces between groups are accepted on input and
    never emitted on output.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int] | np.ndarray = ()):
        array = np.array(bits if isinstance(bits, np.ndarray) else list(bits), dtype=np.int64).ravel()
        if array.size and (array.min() < 0 or array.max() > 1):
            raise EncodingError("Bits must be 0 or 1")
        array = array.astype(np.uint8)
        array.setflags(write=False)
        self._bits = array

    # Constructors
    @classmethod
    def from_str(cls, text: str) -> Self:
        text = text.strip()
        if not text:
            return cls()
        groups = text.split(" ")
        if any(not group for group in groups):
            raise EncodingError("Only single spaces are allowed between bit groups")
        digits = "".join(groups)
        bad = next((i for i, c in enumerate(digits) if c not in "01"), None)
        if bad is not None:
            raise EncodingError(f"Invalid bit character {digits[bad]!r} at position {bad}", position=bad)
        return cls(np.frombuffer(digits.encode("ascii"), dtype=np.uint8) - ord("0"))

    @classmethod
    def from_hex(cls, text: str) -> Self:
        text = text.strip().lower()
        try:
            value = bytes.fromhex(text if len(text) % 2 == 0 else text + "0")
        except ValueError as e:
            raise EncodingError(f"Invalid hex key block: {text!r}") from e
        bits = np.unpackbits(np.frombuffer(value, dtype=np.uint8))
        return cls(bits[: 4 * len(text)])

    @classmethod
    def zeros(cls, length: int) -> Self:
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def random(cls, rng: np.random.Generator, length: int) -> Self:
        return cls(rng.integers(0, 2, size=length, dtype=np.uint8))

    @classmethod
    def concat(cls, *parts: "BitString") -> Self:
        if not parts:
            return cls()
        return cls(np.concatenate([part.bits for part in parts]))

    # Accessors
    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def length(self) -> int:
        return int(self._bits.size)

    def weight(self) -> int:
        return int(self._bits.sum())

    def to_hex(self) -> str:
        if self.length % 4:
            raise DomainError(f"Hex form needs a multiple of 4 bits, got {self.length}", length=self.length)
        padded = np.concatenate([self._bits, np.zeros(-self.length % 8, dtype=np.uint8)])
        return np.packbits(padded).tobytes().hex()[: self.length // 4]

    # Operators
    def __xor__(self, other: "BitString") -> "BitString":
        if self.length != other.length:
            raise LengthMismatchError(
                f"Cannot xor {self.length} bits with {other.length} bits",
                left=self.length,
                right=other.length,
            )
        return BitString(np.bitwise_xor(self._bits, other._bits))

    def __len__(self) -> int:
        return self.length

    def __iter__(self) -> Iterator[int]:
        return (int(b) for b in self._bits)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitString(self._bits[index])
        return int(self._bits[index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self.length == other.length and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash((self.length, np.packbits(self._bits).tobytes()))

    def __str__(self) -> str:
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def __repr__(self) -> str:
        shown = str(self) if self.length <= 64 else f"{str(self)[:61]}..."
        return f"BitString('{shown}', length={self.length})"
