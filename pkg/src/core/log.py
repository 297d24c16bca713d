# src/core/log.py
from __future__ import annotations

import logging

from src.core.config import log_level

_TAGS = {
    logging.DEBUG: "[DBG]",
    logging.INFO: "[OK]",
    logging.WARNING: "[WARN]",
    logging.ERROR: "[ERR]",
    logging.CRITICAL: "[ERR]",
}


class TagFormatter(logging.Formatter):
    """Формат в стиле '[OK] ...' / '[WARN] ...'."""

    def format(self, record: logging.LogRecord) -> str:
        tag = _TAGS.get(record.levelno, "[..]")
        return f"{tag} {record.getMessage()}"


def setup_logging(level: str | None = None) -> None:
    root = logging.getLogger("src")
    if any(isinstance(h.formatter, TagFormatter) for h in root.handlers):
        root.setLevel(level or log_level())
        return
    handler = logging.StreamHandler()
    handler.setFormatter(TagFormatter())
    root.addHandler(handler)
    root.setLevel(level or log_level())
    root.propagate = False


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
