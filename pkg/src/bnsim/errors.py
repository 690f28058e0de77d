"""Exception types raised by the engine."""


class NetworkError(Exception):
    """Base class for network construction and inference errors."""


class ParseError(NetworkError):
    """Malformed network or evidence file. Carries a 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(NetworkError):
    """Structural violation: bad row sums, cycles, undeclared parents."""


class EnumerationGuardError(NetworkError):
    """Exact enumeration refused because the network is too large."""


class ZeroEvidenceError(NetworkError):
    """The observed evidence has probability zero under the network."""


class DegenerateBlanketError(NetworkError):
    """A Markov blanket product is zero for every value of a variable."""


class ZeroScoreError(NetworkError):
    """Every generated sample had weight zero; estimates are undefined."""
