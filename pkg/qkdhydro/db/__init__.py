from .keystore import KeyStore, default_ledger_path
from .writer import csv_text, format_number, read_lines, write_csv, write_text

__all__ = ["KeyStore", "default_ledger_path", "csv_text", "format_number", "read_lines", "write_csv", "write_text"]
