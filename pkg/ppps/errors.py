"""Domain errors raised by the kinematics toolkit."""

from __future__ import annotations

from typing import Any


class KinematicsError(Exception):
    """Base class for domain errors.

    Every error carries a stable ``code`` (used by the CLI in its error
    document) and a ``diagnostics`` mapping with the residuals that explain it.
    """

    code = "KinematicsError"

    def __init__(self, message: str, **diagnostics: Any) -> None:
        super().__init__(message)
        self.message = message
        self.diagnostics: dict[str, Any] = diagnostics

    def to_dict(self) -> dict[str, Any]:
        """Error document for machine-readable output."""
        return {
            "error": self.code,
            "message": self.message,
            "diagnostics": self.diagnostics,
        }


class InvalidInputError(KinematicsError, ValueError):
    """Non-finite values, non-unit quaternions and other malformed inputs."""

    code = "InvalidInput"


class ConfigurationError(KinematicsError, ValueError):
    """Solver options out of range or unknown."""

    code = "Configuration"


class NotPlanarError(KinematicsError):
    """Planar solver called with a nonzero vertical joint."""

    code = "NotPlanar"


class DegenerateError(KinematicsError):
    """The planar quadratic cancels: the joints admit a self-motion."""

    code = "Degenerate"


class NotSelfMotionError(KinematicsError):
    """A Cardanic family was requested for joints outside the self-motion set."""

    code = "NotSelfMotion"
