"""Exception hierarchy shared across the package."""


class OlgmeanError(Exception):
    """Base class for all errors raised by this package."""


# -- data ingestion ---------------------------------------------------------

class ParseError(OlgmeanError):
    """A LIBSVM line could not be parsed.

    ``line_number`` is filled in by :func:`olgmean.dataio.load_dataset` when the
    failure happens while reading a file.
    """

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class MalformedToken(ParseError):
    pass


class DuplicateIndex(ParseError):
    pass


class UnmappedLabel(ParseError):
    pass


class NonFiniteValue(ParseError):
    pass


class EmptyDataset(OlgmeanError):
    pass


class NetworkError(OlgmeanError):
    pass


class ChecksumMismatch(OlgmeanError):
    pass


class UnknownDataset(OlgmeanError):
    pass


# -- learners ---------------------------------------------------------------

class IndexOutOfRange(OlgmeanError):
    """A feature index does not fit inside the weight vector."""


class ZeroNormInstance(OlgmeanError):
    """PA step requested on an instance with ||x|| = 0."""


class UnknownAlgorithm(OlgmeanError):
    pass


# -- metrics / harness ------------------------------------------------------

class NoRounds(OlgmeanError):
    pass


class InsufficientCounts(OlgmeanError):
    pass


class EmptyList(OlgmeanError):
    pass


class EmptySeries(OlgmeanError):
    pass
