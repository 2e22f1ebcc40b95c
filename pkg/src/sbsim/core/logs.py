"""Logging setup shared by the CLI and long-running calibrations."""

import logging
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

_handler: Optional[logging.Handler] = None


def configure_logging(level: str = "WARNING") -> None:
    """Install a single stderr handler on the ``sbsim`` logger.

    Calling this more than once only changes the level.

    Args:
        level: One of DEBUG, INFO, WARNING, ERROR
    """
    global _handler

    log_level = getattr(logging, level.upper(), logging.WARNING)
    package_logger = logging.getLogger("sbsim")
    package_logger.setLevel(log_level)

    if _handler is None:
        _handler = logging.StreamHandler()
        _handler.setFormatter(logging.Formatter(LOG_FORMAT))
        package_logger.addHandler(_handler)
    _handler.setLevel(log_level)
