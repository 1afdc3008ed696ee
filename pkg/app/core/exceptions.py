"""
Custom exceptions for the Gammoid Decider application.
Provides structured error handling for matroid parsing, enumeration caps and tableau derivations.
"""

from typing import Any, Dict, Optional
from fastapi import HTTPException, status


class GammoidException(Exception):
    """Base exception for the Gammoid Decider application."""

    def __init__(
        self,
        message: str,
        error_code: str = "GAMMOID_ERROR",
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


# Command line
class UsageError(GammoidException):
    """Raised when command-line arguments cannot be parsed."""

    def __init__(self, message: str = "Invalid usage", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "USAGE_ERROR", details)


# Input files
class InputError(GammoidException):
    """Raised when an input file cannot be read or understood."""

    def __init__(
        self,
        message: str = "Invalid input",
        details: Optional[Dict[str, Any]] = None,
        error_code: str = "INPUT_ERROR",
    ):
        super().__init__(message, error_code, details)


class MatroidFormatError(InputError):
    """Raised when a matroid, digraph or knowledge-base file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        details = dict(details or {})
        if line is not None:
            details["line"] = line
            message = f"line {line}: {message}"
        super().__init__(message, details, "MATROID_FORMAT_ERROR")


class MatroidAxiomError(InputError):
    """Raised when a basis family violates the basis-exchange axiom."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details, "MATROID_AXIOM_ERROR")


# Enumeration caps
class SizeExceededError(GammoidException):
    """Raised when a ground set exceeds an enumeration cap."""

    def __init__(self, size: int, cap: int, what: str = "ground set"):
        message = f"{what} of size {size} exceeds cap {cap}"
        super().__init__(message, "SIZE_EXCEEDED", {"size": size, "cap": cap, "what": what})


class FlatLatticeTooLargeError(GammoidException):
    """Raised when modular-cut enumeration would exceed the flat cap."""

    def __init__(self, flat_count: int, cap: int):
        message = f"Flat lattice has {flat_count} flats, cap is {cap}"
        super().__init__(message, "FLAT_LATTICE_TOO_LARGE", {"flats": flat_count, "cap": cap})


class RankTooLowError(GammoidException):
    """Raised when a rank-3 contraction is requested from a matroid of rank below 3."""

    def __init__(self, rank: int):
        super().__init__(f"Matroid rank {rank} is below 3", "RANK_TOO_LOW", {"rank": rank})


# Extensions and tableaux
class InvalidCutError(GammoidException):
    """Raised when a family of flats is not a modular cut."""

    def __init__(self, message: str = "Not a modular cut", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "INVALID_CUT", details)


class InvalidSelectionError(GammoidException):
    """Raised when a sub-tableau selection is not contained in its source."""

    def __init__(self, message: str = "Invalid sub-tableau selection", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "INVALID_SELECTION", details)


class NotDecisiveError(GammoidException):
    """Raised when a conclusion is requested from a tableau that is not decisive."""

    def __init__(self, details: Optional[Dict[str, Any]] = None):
        super().__init__("Tableau is not decisive", "NOT_DECISIVE", details)


class NotADeflateError(GammoidException):
    """Raised when an identification is requested for a pair that is not a deflation."""

    def __init__(self, smaller: str, larger: str):
        message = f"{smaller} is not a deflate of {larger}"
        super().__init__(message, "NOT_A_DEFLATE", {"smaller": smaller, "larger": larger})


class UnregisteredMatroidError(GammoidException):
    """Raised when a tableau operation names a key the tableau does not know."""

    def __init__(self, key: str):
        super().__init__(f"Matroid not registered: {key}", "UNREGISTERED_MATROID", {"key": key})


# Engine
class ResourceExhaustedError(GammoidException):
    """Raised when engine caps are hit before the tableau becomes decisive."""

    def __init__(
        self,
        message: str,
        tableau: Any = None,
        trace: Any = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, "RESOURCE_EXHAUSTED", details)
        self.tableau = tableau
        self.trace = trace


def get_exception_exit_code(exc: GammoidException) -> int:
    """
    Get the command-line exit code for a GammoidException.

    Args:
        exc: GammoidException instance

    Returns:
        int: Process exit code
    """
    exit_mapping = {
        "USAGE_ERROR": 64,
        "INPUT_ERROR": 65,
        "MATROID_FORMAT_ERROR": 65,
        "MATROID_AXIOM_ERROR": 65,
        "SIZE_EXCEEDED": 65,
        "RESOURCE_EXHAUSTED": 2,
    }

    return exit_mapping.get(exc.error_code, 70)


def create_http_exception(
    exc: GammoidException,
    status_code: Optional[int] = None
) -> HTTPException:
    """
    Convert a GammoidException to an HTTPException.

    Args:
        exc: GammoidException instance
        status_code: HTTP status code, derived from the error code when omitted

    Returns:
        HTTPException: FastAPI HTTP exception
    """
    return HTTPException(
        status_code=status_code or get_exception_status_code(exc),
        detail={
            "error_code": exc.error_code,
            "message": exc.message,
            "details": {k: v for k, v in exc.details.items() if isinstance(v, (str, int, float, list))}
        }
    )


def get_exception_status_code(exc: GammoidException) -> int:
    """
    Get the appropriate HTTP status code for a GammoidException.

    Args:
        exc: GammoidException instance

    Returns:
        int: HTTP status code
    """
    status_mapping = {
        "USAGE_ERROR": status.HTTP_400_BAD_REQUEST,
        "INPUT_ERROR": status.HTTP_400_BAD_REQUEST,
        "MATROID_FORMAT_ERROR": status.HTTP_400_BAD_REQUEST,
        "MATROID_AXIOM_ERROR": status.HTTP_422_UNPROCESSABLE_ENTITY,
        "SIZE_EXCEEDED": status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
        "FLAT_LATTICE_TOO_LARGE": status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
        "RANK_TOO_LOW": status.HTTP_400_BAD_REQUEST,
        "RESOURCE_EXHAUSTED": status.HTTP_503_SERVICE_UNAVAILABLE,
    }

    return status_mapping.get(exc.error_code, status.HTTP_500_INTERNAL_SERVER_ERROR)
