"""Exception types shared across the package."""


class AttnsumError(Exception):
    """Base class for all errors raised by this package."""


# --- corpus ---------------------------------------------------------------

class EmptyDocument(AttnsumError):
    """The note text is empty or whitespace-only."""


class ParseError(AttnsumError):
    """A corpus record could not be parsed."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class MissingSpecialToken(AttnsumError):
    """The vocabulary lacks one of the required special tokens."""


# --- weight file ----------------------------------------------------------

class WeightFormatError(AttnsumError):
    """Base class for weight-file problems."""


class BadMagic(WeightFormatError):
    pass


class VersionMismatch(WeightFormatError):
    pass


class ShapeMismatch(WeightFormatError):
    def __init__(self, name: str, expected, actual):
        super().__init__(f"tensor {name!r}: expected shape {expected}, got {actual}")
        self.name = name
        self.expected = expected
        self.actual = actual


class TruncatedBlob(WeightFormatError):
    pass


class MissingTensor(WeightFormatError):
    def __init__(self, name: str):
        super().__init__(f"required tensor {name!r} not present")
        self.name = name


# --- encoder --------------------------------------------------------------

class IdOutOfRange(AttnsumError):
    pass


class SequenceTooLong(AttnsumError):
    pass


class DimensionMismatch(AttnsumError):
    pass


# --- summarizers ----------------------------------------------------------

class TooShort(AttnsumError):
    """Encoded sequence has fewer than two tokens."""


class EmptyInput(AttnsumError):
    pass


class NoContent(AttnsumError):
    """Every sentence of the document is empty after cleaning."""


# --- evaluation -----------------------------------------------------------

class EmptyUniverse(AttnsumError):
    pass


class UniverseMismatch(AttnsumError):
    pass


class EmptySummary(AttnsumError):
    pass


class EmptyCorpus(AttnsumError):
    pass
