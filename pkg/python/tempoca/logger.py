"""Logger setup shared by every module of the package.

The levels follow the 0..6 scale used by the simulator tooling
(0=trace, 1=debug, 2=info, 3=warn, 4=error, 5=critical, 6=off).
"""

import enum
import logging
import os

LOGGER_NAME = "tempoca"
LOG_ENV_VAR = "TEMPOCA_LOG"

TRACE = 5
logging.addLevelName(TRACE, "TRACE")


class LoggerLevel(enum.IntEnum):
    trace = 0
    debug = 1
    info = 2
    warn = 3
    error = 4
    critical = 5
    off = 6


_PYTHON_LEVELS = {
    LoggerLevel.trace: TRACE,
    LoggerLevel.debug: logging.DEBUG,
    LoggerLevel.info: logging.INFO,
    LoggerLevel.warn: logging.WARNING,
    LoggerLevel.error: logging.ERROR,
    LoggerLevel.critical: logging.CRITICAL,
    LoggerLevel.off: logging.CRITICAL + 10,
}


def parse_logger_level(value) -> LoggerLevel:
    """Accept a LoggerLevel, an int in [0, 6] or a level name."""
    if isinstance(value, LoggerLevel):
        return value
    text = str(value).strip().lower()
    if text.isdigit():
        return LoggerLevel(int(text))
    if text == "warning":
        text = "warn"
    try:
        return LoggerLevel[text]
    except KeyError:
        raise ValueError(f"unknown log level {value!r}") from None


def get_logger() -> logging.Logger:
    return logging.getLogger(LOGGER_NAME)


def set_logger_level(level) -> None:
    level = parse_logger_level(level)
    get_logger().setLevel(_PYTHON_LEVELS[level])


def _configure():
    logger = get_logger()
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(
            "[%(asctime)s] [%(name)s] [%(levelname)s] %(message)s",
            datefmt="%H:%M:%S"))
        logger.addHandler(handler)
    logger.propagate = False
    try:
        set_logger_level(os.environ.get(LOG_ENV_VAR, LoggerLevel.warn))
    except ValueError:
        set_logger_level(LoggerLevel.warn)
        logger.warning(f"ignoring invalid {LOG_ENV_VAR} value "
                       f"{os.environ[LOG_ENV_VAR]!r}")


_configure()
