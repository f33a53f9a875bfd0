"""Exception types shared across the package."""


class SnpAssocError(Exception):
    """Base class for all package errors."""


class ParseError(SnpAssocError):
    """Malformed corpus/lexicon/model file; carries a line or element locator."""

    def __init__(self, message, locator=None):
        if locator is not None:
            message = f"{message} (at {locator})"
        super().__init__(message)
        self.locator = locator


class InvalidSpan(SnpAssocError):
    """An annotation span falls outside its sentence text."""


class UnknownLabel(SnpAssocError):
    """A gold label or confidence string has no mapping to the fixed vocabulary."""


class TooSmall(SnpAssocError):
    """Not enough documents for the requested split or fold count."""


class AlignmentError(SnpAssocError):
    """Spans do not align to token boundaries, or prediction/gold ids mismatch."""


class DegenerateTrainingSet(SnpAssocError):
    """Training data misses a class required by the learner."""


class KernelError(SnpAssocError):
    """Non-finite kernel value or payload/vocabulary mismatch."""
