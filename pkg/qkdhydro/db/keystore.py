import json
import os
import threading
from datetime import datetime, timezone
from typing import List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import ValidationError

from qkdhydro.common.exception import DomainError, KeyExhaustedError, LedgerConflictError
from qkdhydro.db.writer import ensure_parent, read_lines
from qkdhydro.models import BitString
from qkdhydro.schema import Allocation

LEDGER_SUFFIX = ".ledger"


def default_ledger_path(key_path: str) -> str:
    return key_path + LEDGER_SUFFIX


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class KeyStore:
    """Use-once secure key material.

    Bits are handed out strictly in order; the ledger records every allocation
    and its ranges are contiguous from bit 0. With a ledger path the ledger line
    is appended before memory changes, so a failed write leaves the store as it was.
    """

    def __init__(
        self,
        blocks: Sequence[BitString],
        allocations: Sequence[Allocation] = (),
        key_path: Optional[str] = None,
        ledger_path: Optional[str] = None,
    ):
        self.blocks: List[BitString] = list(blocks)
        self._material = BitString.concat(*self.blocks)
        self.allocations: List[Allocation] = []
        self.key_path = key_path
        self.ledger_path = ledger_path
        self._lock = threading.Lock()
        for allocation in allocations:
            self._check_next(allocation)
            self.allocations.append(allocation)

    # 1. Construction
    @classmethod
    def from_bits(cls, *blocks: BitString) -> "KeyStore":
        return cls(blocks)

    @classmethod
    def load(cls, key_path: str, ledger_path: Optional[str] = None) -> "KeyStore":
        ledger_path = ledger_path or default_ledger_path(key_path)
        blocks = [BitString.from_hex(line) for line in read_lines(key_path)]
        allocations = []
        if os.path.exists(ledger_path):
            for number, line in enumerate(read_lines(ledger_path), start=1):
                try:
                    allocations.append(Allocation.model_validate_json(line))
                except ValidationError as e:
                    raise LedgerConflictError(f"Unreadable ledger line {number}", line=number) from e
        return cls(blocks, allocations, key_path=key_path, ledger_path=ledger_path)

    @staticmethod
    def write_key_file(path: str, blocks: Sequence[BitString]) -> str:
        """Writes hex key blocks, one per line; each block is cut to a multiple of 4 bits."""
        ensure_parent(path)
        with open(path, "w", encoding="utf-8", newline="") as f:
            for block in blocks:
                usable = len(block) - len(block) % 4
                if usable:
                    f.write(block[:usable].to_hex() + "\n")
        return path

    # 2. State
    @property
    def total_bits(self) -> int:
        return len(self._material)

    @property
    def consumed_offset(self) -> int:
        return self.allocations[-1].end_bit if self.allocations else 0

    @property
    def remaining(self) -> int:
        return self.total_bits - self.consumed_offset

    def _check_next(self, allocation: Allocation) -> None:
        if allocation.start_bit != self.consumed_offset:
            raise LedgerConflictError(
                f"Allocation starts at bit {allocation.start_bit}, expected {self.consumed_offset}",
                start_bit=allocation.start_bit,
                expected=self.consumed_offset,
            )
        if allocation.end_bit > self.total_bits:
            raise LedgerConflictError(
                f"Allocation ends at bit {allocation.end_bit} beyond {self.total_bits} bits of key",
                end_bit=allocation.end_bit,
            )

    # 3. Allocation
    def allocate(self, n: int, purpose: str) -> Tuple[Allocation, BitString]:
        if n <= 0:
            raise DomainError(f"Allocation size must be > 0, got {n}")
        with self._lock:
            if n > self.remaining:
                raise KeyExhaustedError(
                    f"Need {n} key bits, {self.remaining} remain",
                    requested=n,
                    remaining=self.remaining,
                )
            start = self.consumed_offset
            allocation = Allocation(purpose=purpose, start_bit=start, end_bit=start + n, timestamp=_utc_now())
            if self.ledger_path:
                ensure_parent(self.ledger_path)
                with open(self.ledger_path, "a", encoding="utf-8") as f:
                    f.write(allocation.model_dump_json() + "\n")
            self.allocations.append(allocation)
        logger.debug(json.dumps({"event": "allocation", "purpose": purpose, "start_bit": start, "end_bit": start + n}))
        return allocation, self._material[allocation.start_bit : allocation.end_bit]

    def read(self, allocation: Allocation) -> BitString:
        """Key bits of a recorded allocation, for the receiving side."""
        if allocation not in self.allocations:
            raise LedgerConflictError(
                f"No allocation for {allocation.purpose} in the ledger", purpose=allocation.purpose
            )
        return self._material[allocation.start_bit : allocation.end_bit]

    def find(self, purpose: str) -> Allocation:
        for allocation in reversed(self.allocations):
            if allocation.purpose == purpose:
                return allocation
        raise LedgerConflictError(f"No allocation recorded for {purpose!r}", purpose=purpose)

    def find_range(self, start_bit: int, end_bit: int) -> Allocation:
        for allocation in self.allocations:
            if (allocation.start_bit, allocation.end_bit) == (start_bit, end_bit):
                return allocation
        raise LedgerConflictError(
            f"No allocation covers key bits {start_bit}:{end_bit}", start_bit=start_bit, end_bit=end_bit
        )
