"""Formatting and small file utilities shared by writers and renderers."""

import hashlib
import math
import os
import tempfile
from pathlib import Path
from typing import Type, Union


def format_real(value: float) -> str:
    """
    Format a real for TSV output with 17 significant digits.

    17 digits make every binary64 value round-trip exactly through text.

    Args:
        value: Value to format

    Returns:
        Formatted string (``NA`` for NaN)
    """
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    return f"{float(value):.17g}"


def parse_real(text: str) -> float:
    """Inverse of :func:`format_real`."""
    text = text.strip()
    if text in ("", "NA", "NaN", "nan"):
        return math.nan
    return float(text)


def format_pvalue(p: float) -> str:
    """
    Format a p-value for display in figures.

    Examples:
        0.0312   -> "0.031"
        0.00021  -> "2.1e-04"
        1.0      -> "1.000"
    """
    if p is None or math.isnan(p):
        return "NA"
    if p < 0.001:
        return f"{p:.1e}"
    return f"{p:.3f}"


def sha256_file(path: Union[str, Path]) -> str:
    """Return the hex SHA-256 digest of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    """
    Write text to ``path`` via a temporary file in the same directory and rename.

    Readers never observe a partially written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def read_utf8_text(path: Union[str, Path], error_type: Type[Exception]) -> str:
    """
    Read a UTF-8 text file.

    Raises:
        error_type: The file holds bytes that are not valid UTF-8; the message
            names the path and the byte offset of the first bad byte
    """
    path = Path(path)
    data = path.read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise error_type(
            f"{path} is not valid UTF-8: byte 0x{data[e.start]:02x} at offset {e.start}"
        ) from None
