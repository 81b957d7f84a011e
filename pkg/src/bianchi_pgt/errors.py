"""Exception and warning types shared across the package."""


class BianchiError(Exception):
    """Base class for errors raised by this package."""


class FieldMismatch(BianchiError, ValueError):
    pass


class NotLoxodromic(BianchiError, ValueError):
    pass


class DomainError(BianchiError, ValueError):
    pass


class OutOfRange(BianchiError, ValueError):
    pass


class PoleAtOne(DomainError):
    pass


class ParseError(BianchiError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantViolation(BianchiError, ValueError):
    def __init__(self, message, rows=()):
        self.rows = list(rows)
        if self.rows:
            message = f"{message} (rows {', '.join(map(str, self.rows))})"
        super().__init__(message)


class BudgetExceeded(BianchiError, RuntimeError):
    """Enumeration hit its element cap; ``partial`` holds the unsaturated ledger."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateGrid(BianchiError, ValueError):
    pass


class ZeroDenominator(BianchiError, ZeroDivisionError):
    pass


class ConfigError(BianchiError, ValueError):
    pass


class MissingInput(BianchiError, FileNotFoundError):
    pass


# warnings

class UncertifiedTorsion(UserWarning):
    pass


class IllConditioned(UserWarning):
    pass


class EmptyRange(UserWarning):
    pass


class HeightExhausted(UserWarning):
    pass
