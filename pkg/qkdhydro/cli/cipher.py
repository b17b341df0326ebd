import os
import re
from typing import List, Optional, Tuple

import typer

from qkdhydro.common.exception import LedgerConflictError
from qkdhydro.core.middleware import command
from qkdhydro.db import KeyStore, read_lines, write_text
from qkdhydro.models import AllocationPurpose, BitString
from qkdhydro.schema import Allocation
from qkdhydro.service.bitops import ASCII7_WIDTH, decode_ascii7, encode_ascii7
from qkdhydro.service.crypto import otp_decrypt, otp_encrypt

cliRouter = typer.Typer()

# first line of a ciphertext file: the key range its encryption consumed
KEY_RANGE_HEADER = "# key bits {start}:{end}"
KEY_RANGE_PATTERN = re.compile(r"^# key bits (\d+):(\d+)$")


def _purpose(ciphertext_path: str) -> str:
    return f"{AllocationPurpose.OTP.value}:{os.path.basename(ciphertext_path)}"


def _grouped(bits: BitString) -> str:
    text = str(bits)
    return " ".join(text[i : i + ASCII7_WIDTH] for i in range(0, len(text), ASCII7_WIDTH))


def _split_header(lines: List[str]) -> Tuple[Optional[Tuple[int, int]], List[str]]:
    if lines and lines[0].startswith("#"):
        match = KEY_RANGE_PATTERN.match(lines[0])
        if match is None:
            raise LedgerConflictError(f"Unreadable key range line {lines[0]!r}")
        return (int(match.group(1)), int(match.group(2))), lines[1:]
    return None, lines


def _check_allocation(allocation: Allocation, length: int) -> None:
    if not allocation.purpose.startswith(AllocationPurpose.OTP.value):
        raise LedgerConflictError(
            f"Key bits {allocation.start_bit}:{allocation.end_bit} were allocated for {allocation.purpose}",
            purpose=allocation.purpose,
        )
    if allocation.length != length:
        raise LedgerConflictError(
            f"Ciphertext has {length} bits, its allocation covers {allocation.length}",
            purpose=allocation.purpose,
        )


@cliRouter.command(help="One-time pad a text file with unused key bits.")
@command
def encrypt(
    message: str = typer.Option(..., "--message", help="📄 Plain text file, 7-bit ASCII"),
    key: str = typer.Option(..., "--key", help="🔑 Key file"),
    out: str = typer.Option(..., "--out", help="🔒 Ciphertext file"),
    ledger: Optional[str] = typer.Option(None, "--ledger", help="📒 Ledger file, defaults to <key>.ledger"),
):
    with open(message, encoding="utf-8", newline="") as f:
        plaintext = encode_ascii7(f.read())
    store = KeyStore.load(key, ledger)
    ciphertext, _ = otp_encrypt(plaintext, store, purpose=_purpose(out))
    if len(ciphertext):
        allocation = store.allocations[-1]
        header = KEY_RANGE_HEADER.format(start=allocation.start_bit, end=allocation.end_bit)
        write_text(out, f"{header}\n{_grouped(ciphertext)}\n")
    else:
        write_text(out, "")
    typer.echo(out)


@cliRouter.command(help="Recover a text file with the key bits its encryption consumed.")
@command
def decrypt(
    ciphertext: str = typer.Option(..., "--ciphertext", help="🔒 Ciphertext file"),
    key: str = typer.Option(..., "--key", help="🔑 Key file"),
    out: str = typer.Option(..., "--out", help="📄 Plain text file to write"),
    ledger: Optional[str] = typer.Option(None, "--ledger", help="📒 Ledger file, defaults to <key>.ledger"),
):
    key_range, body = _split_header(read_lines(ciphertext))
    bits = BitString.from_str(" ".join(body))
    if len(bits) == 0:
        write_text(out, "")
        return
    if key_range is None:
        raise LedgerConflictError("Ciphertext does not name the key bits it consumed")
    store = KeyStore.load(key, ledger)
    allocation = store.find_range(*key_range)
    _check_allocation(allocation, len(bits))
    write_text(out, decode_ascii7(otp_decrypt(bits, store.read(allocation))))
    typer.echo(out)
