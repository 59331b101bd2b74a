"""Exception classes for the meandim package."""

from typing import Any, ClassVar


class MeanDimException(Exception):
    """Base class for exceptions in the meandim package.

    Attributes:
        message (str): The human readable message.
        details (dict[str, Any]): Extra machine readable fields.
        exit_code (int): The process exit code used by the command line.
    """

    exit_code: ClassVar[int] = 1

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        """
        Return the exception as a machine readable dictionary.

        Returns:
            dict[str, Any]: The error object.
        """
        return {
            "error": {
                "type": type(self).__name__,
                "message": self.message,
                **self.details,
            }
        }


class ConfigParseError(MeanDimException):
    """Exception raised when a config file cannot be parsed."""

    exit_code: ClassVar[int] = 2

    def __init__(
        self,
        message: str,
        path: str = "",
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        location = f"{path}:{line}:{column}" if line is not None else path
        super().__init__(
            f"{location}: {message}" if location else message,
            path=path,
            line=line,
            column=column,
        )


class IncompatibleSpecsError(MeanDimException):
    """Exception raised when two specs cannot be used together."""

    exit_code: ClassVar[int] = 3

    def __init__(self, first: str, second: str, reason: str) -> None:
        super().__init__(
            f"{first} is incompatible with {second}: {reason}",
            first=first,
            second=second,
        )


class UnsupportedMeasureError(IncompatibleSpecsError):
    """Exception raised when a measure kind is not supported by an operation."""

    def __init__(self, measure: str, reason: str) -> None:
        super().__init__(f"measure {measure}", "operation", reason)


class ResourceCapExceeded(MeanDimException):
    """Exception raised when a configured resource cap is exceeded."""

    exit_code: ClassVar[int] = 4

    def __init__(self, cap: str, limit: int, requested: int | None = None) -> None:
        message = f"Resource cap {cap}={limit} exceeded"
        if requested is not None:
            message += f" (requested {requested})"
        super().__init__(message + ".", cap=cap, limit=limit, requested=requested)


class BoundedSearchError(ResourceCapExceeded):
    """Exception raised when a breadth-first search hits its radius cap."""


class ElementMismatchError(MeanDimException, TypeError):
    """Exception raised when an element does not belong to the given group."""

    def __init__(self, element: object, kind: str) -> None:
        super().__init__(f"{element!r} is not an element of {kind}.", kind=kind)


class PreconditionError(MeanDimException, ValueError):
    """Exception raised when an operation precondition does not hold."""


class HypothesisViolatedError(PreconditionError):
    """Exception raised when the hypothesis of a bound is not satisfied."""

    def __init__(self, hypothesis: str) -> None:
        super().__init__(f"Hypothesis violated: {hypothesis}", hypothesis=hypothesis)


class InfeasibleDistortionError(PreconditionError):
    """Exception raised when a target distortion cannot be achieved."""

    def __init__(self, target: float, minimum: float) -> None:
        super().__init__(
            f"Distortion {target} is below the achievable minimum {minimum}.",
            target=target,
            minimum=minimum,
        )
