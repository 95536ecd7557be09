"""Exception types raised across the package.

Every error derives from :class:`EncoderError`; most also derive from
``ValueError`` so callers that only care about bad input can catch that.
"""


class EncoderError(Exception):
    """Base class for all package errors."""


# wheel / simulator
class BadSectorCount(EncoderError, ValueError):
    pass


class NonZeroErrorSum(EncoderError, ValueError):
    pass


class NonPositiveSector(EncoderError, ValueError):
    pass


class NonPositiveSpeed(EncoderError, ValueError):
    pass


class OutOfHorizon(EncoderError, ValueError):
    pass


# streaming ingestion
class NonMonotonicTimestamp(EncoderError, ValueError):
    pass


class NonPositiveInput(EncoderError, ValueError):
    pass


# estimator
class EmptyData(EncoderError, ValueError):
    pass


class NonFiniteObservation(EncoderError, ValueError):
    pass


class EstimatorDisabled(EncoderError, RuntimeError):
    pass


class IncompleteRevolution(EncoderError, ValueError):
    pass


class OutOfRange(EncoderError, ValueError):
    pass


class BadSector(EncoderError, IndexError):
    pass


class NonPositiveDt(EncoderError, ValueError):
    pass


# spectral analysis
class InsufficientData(EncoderError, ValueError):
    pass


class FieldAbsent(EncoderError, KeyError):
    pass


class TooShort(EncoderError, ValueError):
    pass


class NoPeak(EncoderError):
    pass


# baseline filters
class BadCutoff(EncoderError, ValueError):
    pass


class NotchAboveNyquist(EncoderError, ValueError):
    pass


# cli
class ConfigError(EncoderError, ValueError):
    pass


class ParseError(EncoderError, ValueError):
    pass


class PipelineError(EncoderError):
    pass


class NonPositiveAngleWarning(UserWarning):
    """An estimated sector angle dropped to zero or below."""
