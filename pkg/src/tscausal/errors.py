"""Exception hierarchy and warning categories.

Two error families map onto the CLI / service exit-code contract:
``DataError`` (exit code 2) for invalid or insufficient input data, and
``NumericalError`` (exit code 3) for failures arising during computation
(divergence, degeneracy, singular systems). Usage errors (bad flags,
malformed requests) are exit code 1 and never raise these classes.
"""


class TscausalError(Exception):
    """Base class for all package errors."""


class DataError(TscausalError):
    """Input data is invalid, malformed, or insufficient."""


class NumericalError(TscausalError):
    """A computation failed for numerical reasons."""


# -- data errors --------------------------------------------------------------

class SeriesTooShort(DataError):
    pass


class ZeroVariance(DataError):
    pass


class InvalidFilterConfig(DataError):
    pass


class AlignmentMismatch(DataError):
    pass


class LibraryTooLong(DataError):
    pass


class TooFewSamples(DataError):
    pass


class EmptyInput(DataError):
    pass


class ParseError(DataError):
    pass


class NonUniformSampling(DataError):
    pass


class EmptyFile(DataError):
    pass


# -- numerical errors ----------------------------------------------------------

class NotEnoughNeighbors(NumericalError):
    pass


class DegenerateNeighborhood(NumericalError):
    pass


class SingularGram(NumericalError):
    pass


class SingularDesign(NumericalError):
    pass


class AllRowsDegenerate(NumericalError):
    pass


class Divergence(NumericalError):
    pass


# -- warnings ------------------------------------------------------------------

class LagCapWarning(UserWarning):
    """Autocorrelation never dropped below threshold; lag capped at len/4."""


class DimensionSaturationWarning(UserWarning):
    """False-neighbor fraction never fell below tolerance up to max_dim."""


class DegenerateDataWarning(UserWarning):
    """Input contained duplicate or deterministically tied points; jitter applied."""
