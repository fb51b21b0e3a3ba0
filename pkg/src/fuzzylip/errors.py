"""Exception hierarchy shared by every module of the package."""


class FuzzyLipError(Exception):
    """Base class for all package errors."""


class DomainError(FuzzyLipError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(FuzzyLipError, ArithmeticError):
    """A numerical routine failed, e.g. bisection did not converge."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class InvalidMetricError(FuzzyLipError, ValueError):
    """A membership value fell outside [0, 1]."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConstructionError(FuzzyLipError, ValueError):
    """A space or metric could not be built from the given data."""


class NonLipschitzError(FuzzyLipError):
    """No finite dilation exists for the sampled map."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class HypothesisError(FuzzyLipError):
    """The boundedness hypothesis that licenses the extension is violated."""

    def __init__(self, message, pair=None, margin=None):
        super().__init__(message)
        self.pair = pair
        self.margin = margin


class ExtensionUndefinedError(FuzzyLipError):
    """Every distance from the query point to the sample set is infinite."""

    def __init__(self, message, query=None):
        super().__init__(message)
        self.query = query


class ConfigError(FuzzyLipError):
    """Malformed run configuration or unreadable input file."""
