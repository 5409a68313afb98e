import sys
from typing import Optional

from loguru import logger

# worker threads are named after their command ("powers_0", "verify_1", ...)
CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<magenta>{thread.name}</magenta> | <cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {thread.name} | {name}:{function}:{line} - {message}"


def setup_logger(level: str = "INFO", log_file: Optional[str] = None):
    """Console sink at `level`; optional run log that always keeps DEBUG."""
    logger.remove()
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level.upper(), colorize=True)

    if log_file:
        logger.add(
            log_file,
            format=FILE_FORMAT,
            rotation="50 MB",
            retention="7 days",
            level="DEBUG",
            compression="zip",
            enqueue=True,
        )

    return logger

log = setup_logger()
