"""Exception types shared across the package."""


class EmgDecodeError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(EmgDecodeError, ValueError):
    """A filter, block, window, or model specification is not realizable."""


class InvalidInputError(EmgDecodeError, ValueError):
    """Input data violates a precondition (shape, finiteness, sign, length)."""


class InvalidRangeError(EmgDecodeError, ValueError):
    """A requested index or time range is empty or inverted."""


class OutOfRangeError(EmgDecodeError, ValueError):
    """A requested point lies outside the span of the available data."""


class AlignmentError(EmgDecodeError, ValueError):
    """Row counts of paired feature/target data do not match."""


class TrainingDivergedError(EmgDecodeError, RuntimeError):
    """Model training produced a non-finite loss."""


class ConfigError(EmgDecodeError, ValueError):
    """A run configuration is malformed (unknown keys, bad values)."""


class PipelineError(EmgDecodeError, RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
