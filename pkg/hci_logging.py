"""
Logging setup shared by the command-line entry points.

Library modules only ever call ``logging.getLogger(__name__)``; handlers are
installed here, once, by whoever owns the process.
"""

import logging

from rich.console import Console
from rich.logging import RichHandler

VERBOSITY_LEVELS = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG}


def configure_logging(verbosity: int = 0) -> None:
    """
    Route log records to stderr through rich.

    Args:
        verbosity (int): 0 warnings only, 1 adds progress information, 2+ debug

    Returns:
        None
    """
    level = VERBOSITY_LEVELS.get(verbosity, logging.DEBUG)
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=verbosity >= 2,
        rich_tracebacks=verbosity >= 2,
    )
    root = logging.getLogger()
    # Re-configuring (tests, repeated CLI calls in one process) replaces the handler
    for existing in list(root.handlers):
        if isinstance(existing, RichHandler):
            root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
    logging.captureWarnings(True)


def progress_enabled() -> bool:
    """True when the root logger is at INFO or below, i.e. the user asked for -v."""
    return logging.getLogger().getEffectiveLevel() <= logging.INFO
