"""
Logging configuration for the Gammoid Decider application.
Provides structured logging for engine steps, tableau derivations and certificate checks.
"""

import logging
import sys
from typing import Any, Dict
import structlog
from structlog.stdlib import LoggerFactory

from app.core.config import settings


def setup_logging() -> None:
    """
    Configure structured logging for the application.
    Logs go to stderr; stdout carries command output only.
    """

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            _get_processor(),
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, settings.LOG_LEVEL.upper()),
    )

    logging.getLogger("uvicorn").setLevel(logging.INFO)
    logging.getLogger("uvicorn.access").setLevel(logging.INFO)
    logging.getLogger("httpx").setLevel(logging.WARNING)


def _get_processor():
    """
    Get the appropriate processor based on environment.

    Returns:
        Processor function for structlog
    """
    if settings.ENVIRONMENT == "production" or settings.LOG_FORMAT == "json":
        return structlog.processors.JSONRenderer()
    else:
        return structlog.dev.ConsoleRenderer(colors=False)


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """
    Get a structured logger instance.

    Args:
        name: Logger name (usually __name__)

    Returns:
        structlog.stdlib.BoundLogger: Configured logger instance
    """
    return structlog.get_logger(name)


# Specialized logging functions for decision-procedure operations

def log_engine_step(
    step: int,
    goal_key: str = None,
    outcome: str = None,
    worker: int = None,
    **kwargs
) -> None:
    """
    Log one executed step of the decision procedure.

    Args:
        step: Step number (1-13)
        goal_key: Hex canonical key of the intermediate goal
        outcome: Short outcome tag
        worker: Worker index in parallel runs
        **kwargs: Additional context
    """
    logger = get_logger("engine.step")
    logger.debug(
        "Engine step",
        step=step,
        goal_key=goal_key,
        outcome=outcome,
        worker=worker,
        **kwargs
    )


def log_derivation(
    kind: str,
    justification: str = None,
    inputs: int = None,
    **kwargs
) -> None:
    """
    Log a tableau derivation.

    Args:
        kind: Derivation kind (join, sub, expansion, extended, conclusion, identified, seed)
        justification: Rule text
        inputs: Number of input tableaux or keys
        **kwargs: Additional context
    """
    logger = get_logger("tableau.derivation")
    logger.debug(
        "Tableau derivation",
        kind=kind,
        justification=justification,
        inputs=inputs,
        **kwargs
    )


def log_certificate(
    kind: str,
    verdict: str,
    size: int = None,
    **kwargs
) -> None:
    """
    Log a certificate computation (alpha, SBO, minor search, deflation).

    Args:
        kind: Certificate kind
        verdict: Result summary
        size: Ground set size of the matroid checked
        **kwargs: Additional context
    """
    logger = get_logger("certificate")
    logger.debug(
        "Certificate computed",
        kind=kind,
        verdict=verdict,
        size=size,
        **kwargs
    )


def log_extension_batch(
    goal_key: str,
    size: int,
    count: int,
    exhausted: bool = False,
    **kwargs
) -> None:
    """
    Log a batch of extension classes pulled in the exhaustion step.

    Args:
        goal_key: Hex canonical key of the extended matroid
        size: Largest extension size reached
        count: Classes pulled in this batch
        exhausted: Whether the stream ended
        **kwargs: Additional context
    """
    logger = get_logger("engine.extensions")
    logger.info(
        "Extension batch",
        goal_key=goal_key,
        size=size,
        count=count,
        exhausted=exhausted,
        **kwargs
    )


def log_error(error: Exception, context: Dict[str, Any] = None) -> None:
    """
    Log an error with context.

    Args:
        error: Exception instance
        context: Additional context information
    """
    logger = get_logger("error")
    logger.error(
        "An error occurred",
        error=str(error),
        error_type=type(error).__name__,
        context=context or {},
        exc_info=True
    )


def log_request(method: str, url: str, status_code: int, duration: float, **kwargs) -> None:
    """
    Log HTTP request details.

    Args:
        method: HTTP method
        url: Request URL
        status_code: Response status code
        duration: Request duration in seconds
        **kwargs: Additional context to log
    """
    logger = get_logger("http.request")
    logger.info(
        "HTTP request completed",
        method=method,
        url=url,
        status_code=status_code,
        duration=duration,
        **kwargs
    )
