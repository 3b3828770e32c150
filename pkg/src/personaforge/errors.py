"""Exception types shared across the package."""


class ForgeError(Exception):
    """Base class for all personaforge errors."""


class DatasetError(ForgeError):
    """Malformed or out-of-contract input data (bad CSV cell, duplicate id, ...)."""


class ParameterError(ForgeError):
    """Parameter combination that cannot be run (r too large, trial count over cap, ...)."""


class NoClusterFound(ForgeError):
    """Every sampling trial for a target subject was discarded."""

    def __init__(self, target: str, message: str | None = None):
        self.target = target
        super().__init__(message or f"no acceptable cluster found for subject {target!r}; "
                                    "parameters are too strict (try a larger w or smaller alpha)")


class NoSharedDims(ForgeError):
    """A subject shares no observed dimension with any other subject."""
