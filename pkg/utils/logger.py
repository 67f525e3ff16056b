"""Centralized logging configuration."""
import logging
import os
import sys
from typing import Dict, Optional

_default_log_level = os.getenv("CRI_LOG", "INFO")
_default_log_file: Optional[str] = os.getenv("CRI_LOG_FILE")
_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
_loggers: Dict[str, logging.Logger] = {}


def _level(level: str) -> int:
    return getattr(logging, str(level).upper(), logging.INFO)


def _attach_file_handler(log: logging.Logger, log_file: str) -> None:
    if any(isinstance(h, logging.FileHandler) for h in log.handlers):
        return
    try:
        fh = logging.FileHandler(log_file, encoding="utf-8")
        fh.setFormatter(logging.Formatter(_FORMAT))
        log.addHandler(fh)
    except OSError:
        log.warning("Could not open log file %s", log_file)


def get_logger(name: str, level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """Get or create a logger with optional level and file output."""
    log = logging.getLogger(name)
    if level is None:
        level = _default_log_level
    if log_file is None:
        log_file = _default_log_file

    if not log.handlers:
        log.setLevel(_level(level))
        h = logging.StreamHandler(sys.stdout)
        h.setFormatter(logging.Formatter(_FORMAT))
        log.addHandler(h)
        log.propagate = False
        if log_file:
            _attach_file_handler(log, log_file)
    _loggers[name] = log
    return log


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Set the level (and optional log file) for every logger handed out by get_logger, past and future."""
    global _default_log_level, _default_log_file
    _default_log_level = level
    _default_log_file = log_file
    for log in _loggers.values():
        log.setLevel(_level(level))
        if log_file:
            _attach_file_handler(log, log_file)
