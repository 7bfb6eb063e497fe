"""Exception hierarchy shared by all fracovid modules."""


class FracovidError(Exception):
    """Base class for package errors."""


class NumericalError(FracovidError):
    """A computation could not produce a finite, well-defined result."""


class IntegrationDiverged(NumericalError):
    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite state produced at step {step}")


class NoConvergence(NumericalError):
    pass


class SingularityError(NumericalError, ZeroDivisionError):
    pass


class ValidationError(FracovidError, ValueError):
    """Inputs violate a documented invariant."""


class InvalidPopulation(ValidationError):
    pass


class AlignmentError(ValidationError):
    pass


class ConfigError(ValidationError):
    """Configuration problem; ``key`` names the offending dotted key path."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class DataError(FracovidError):
    """Case-data file is missing, unreadable or inconsistent."""


class GapError(DataError):
    def __init__(self, missing_date):
        self.missing_date = missing_date
        super().__init__(f"missing date in case series: {missing_date.isoformat()}")


class ParseError(DataError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DataValidationError(DataError, ValidationError):
    """Case data parsed but violates an invariant (negative counts, empty window)."""
