"""Logging configuration for pathwise."""

import sys
from pathlib import Path
from typing import Any, Optional

from loguru import logger

from src.pathwise.config import config

_CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{extra[name]}</cyan> - <level>{message}</level>{extra[kv]}\n{exception}"
)
_FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {extra[name]} - {message}{extra[kv]}\n{exception}"


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return ",".join(str(item) for item in items)
    text = str(value)
    return f'"{text}"' if " " in text else text


def _patch_record(record: dict) -> None:
    """Render bound extras as a machine-readable ``key=value`` suffix."""
    extra = record["extra"]
    extra.setdefault("name", record["name"])
    pairs = [
        f"{key}={_format_value(value)}"
        for key, value in sorted(extra.items())
        if key not in ("name", "kv")
    ]
    extra["kv"] = (" " + " ".join(pairs)) if pairs else ""


def setup_logger(
    level: Optional[str] = None,
    quiet: bool = False,
    log_file: Optional[Path] = None,
) -> None:
    """
    Configure logging for the application.

    Args:
        level: Minimum level for the stderr sink (defaults to config)
        quiet: Raise the stderr threshold to WARNING
        log_file: Optional file sink (defaults to config)
    """
    # Remove default handler
    logger.remove()
    logger.configure(patcher=_patch_record)

    console_level = "WARNING" if quiet else (level or config.log_level)
    logger.add(
        sys.stderr,
        format=_CONSOLE_FORMAT,
        level=console_level,
        colorize=None,
    )

    log_path = log_file or config.log_file
    if log_path is not None:
        logger.add(
            log_path,
            format=_FILE_FORMAT,
            level="DEBUG",
            rotation="10 MB",
            retention="7 days",
        )


def get_logger(name: str):
    """
    Get a logger instance for a specific module.

    Args:
        name: Module name

    Returns:
        Logger instance
    """
    return logger.bind(name=name)


# Initialize logger on import
setup_logger()
