import csv
import io
import math
import os
from numbers import Integral
from typing import Any, Dict, Iterable, List, Sequence

from qkdhydro.core.config import settings


def format_number(value: Any, digits: int | None = None) -> str:
    """Integers verbatim, reals in fixed-point notation with ``digits`` significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, float) or hasattr(value, "dtype"):
        digits = digits or settings.CSV_SIGNIFICANT_DIGITS
        value = float(value)
        if value == 0 or not math.isfinite(value):
            return str(value) if value else "0"
        # the exponent comes from the rounded value (9.9999996 -> 10.0000)
        scientific = f"{value:.{digits - 1}e}"
        exponent = int(scientific.split("e")[1])
        return f"{float(scientific):.{max(digits - 1 - exponent, 0)}f}"
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(header), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: format_number(row.get(key)) for key in header})
    return buffer.getvalue()


def ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_text(path: str, text: str) -> str:
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    return write_text(path, csv_text(header, rows))


def read_lines(path: str) -> List[str]:
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]
