"""Error taxonomy shared by the library and the CLI.

Every error carries the process exit code the CLI reports for it.
"""


class QuPSTError(Exception):
    """Base class for all QuPST errors."""

    exit_code: int = 4

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__

    def one_line(self) -> str:
        """Machine-parsable single-line rendering used by the CLI."""
        text = " ".join(str(self.message).split())
        return f"error={self.__class__.__name__} code={self.exit_code} message={text}"


class UsageError(QuPSTError):
    exit_code = 1


class ValidationError(QuPSTError, ValueError):
    exit_code = 2


class IoError(QuPSTError):
    exit_code = 3


class NumericError(QuPSTError):
    exit_code = 4


# Usage
class BadArgs(UsageError):
    pass


# Circuits
class IndexOutOfRange(ValidationError):
    pass


class UncoupledCNOT(ValidationError):
    pass


class UnsupportedQubitCount(ValidationError):
    pass


class ContainsMeasurement(ValidationError):
    pass


class EmptyCouplingMap(ValidationError):
    pass


# Noise and simulation
class NonPositiveFactor(ValidationError):
    pass


class InvalidProfile(ValidationError):
    pass


class ProfileMismatch(ValidationError):
    pass


class ZeroShots(ValidationError):
    pass


# Learning
class EmptyTrainingSet(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NormalizerMissing(ValidationError):
    pass


class EmptyBatch(ValidationError):
    pass


class EmptySplit(ValidationError):
    pass


# Metrics
class EmptyInput(ValidationError):
    pass


class ZeroVariance(ValidationError):
    pass


class NonFiniteActivation(NumericError):
    pass
