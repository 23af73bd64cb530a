"""Utility functions and helpers for pathwise."""

from src.pathwise.utils.logger import setup_logger, get_logger
from src.pathwise.utils.formatting import (
    atomic_write_text,
    read_utf8_text,
    format_pvalue,
    format_real,
    parse_real,
    sha256_file,
)

__all__ = [
    "setup_logger",
    "get_logger",
    "atomic_write_text",
    "read_utf8_text",
    "format_pvalue",
    "format_real",
    "parse_real",
    "sha256_file",
]
