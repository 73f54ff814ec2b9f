import sys

from loguru import logger

from core import config


def configure(level: str = config.LOG_LEVEL, colorize: bool = not config.NO_COLOR) -> None:
    """
    Route loguru to a single sink writing to whatever ``sys.stderr`` is at the time.

    Args:
        level (str): Minimum level to emit (DEBUG, INFO, WARNING, ...).
        colorize (bool): Whether ANSI colors are allowed on the sink.
    """
    logger.remove()
    logger.add(lambda m: sys.stderr.write(m), format="[{level}] {message}", level=level.upper(), colorize=colorize)


configure()
