"""
Logging Configuration
Structured logging with Sentry integration for error tracking.
"""

import logging
import sys

from app.config import settings


def setup_logging() -> logging.Logger:
    """
    Configure application logging with structured output.
    Sentry picks up errors when a DSN is configured.

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger("gasgsm")
    logger.setLevel(getattr(logging, settings.LOG_LEVEL))

    # Remove existing handlers
    logger.handlers.clear()

    # stdout carries command output (summary JSON, tables)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, settings.LOG_LEVEL))

    # Format: timestamp - level - module - message
    formatter = logging.Formatter(
        fmt="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)

    logger.debug(f"Logging initialized - Level: {settings.LOG_LEVEL}")
    logger.debug(f"Environment: {settings.ENVIRONMENT}")
    if settings.SENTRY_DSN:
        logger.info("Sentry monitoring enabled")

    return logger


def log_trial_result(
    logger: logging.Logger,
    trial: int,
    optimum_found: bool,
    qcqd: int,
    qccd: int,
    elapsed: float,
    error: str | None = None,
) -> None:
    """
    Log the outcome of one Monte Carlo trial.

    Args:
        logger: Logger instance
        trial: Trial index within the experiment
        optimum_found: Whether GAS reached the optimum of its objective
        qcqd: Total Grover operator applications in the run
        qccd: Total measurements in the run (initial sample included)
        elapsed: Wall time of the trial in seconds
        error: Error message if the trial failed
    """
    log_data = {
        "trial": trial,
        "optimum_found": optimum_found,
        "qcqd": qcqd,
        "qccd": qccd,
        "elapsed_ms": round(elapsed * 1000, 2),
    }

    if error:
        log_data["error"] = error
        logger.error(f"Trial failed: {log_data}")
    else:
        logger.debug(f"Trial finished: {log_data}")


# Global logger instance
app_logger = setup_logging()
