"""Exception taxonomy shared across the toolkit.

Every error raised by this package derives from :class:`RestoreEvalError`
so callers can catch one type at the CLI boundary.  The intermediate
classes group failures by stage: file decoding, manifest validation,
metric preconditions.
"""


class RestoreEvalError(Exception):
    """Base class for all errors raised by this package."""


# --- tensor files -----------------------------------------------------------

class TensorFormatError(RestoreEvalError):
    """A tensor file violates the container format."""


class BadMagic(TensorFormatError):
    """File does not start with the expected magic bytes."""


class UnsupportedDtype(TensorFormatError):
    """Header declares a dtype code this reader does not handle."""


class TruncatedPayload(TensorFormatError):
    """File ends before the declared header or payload is complete."""


# --- series files ------------------------------------------------------------

class SeriesFormatError(RestoreEvalError):
    """A series CSV violates the expected layout."""


class HeaderMismatch(SeriesFormatError):
    """CSV header is missing the time column or has duplicate channels."""


class NonMonotonicTime(SeriesFormatError):
    """Timestamps are not strictly increasing."""


class RaggedRow(SeriesFormatError):
    """A data row has the wrong number of fields."""


# --- shared decode failures ---------------------------------------------------

class NonFiniteValue(RestoreEvalError):
    """NaN or infinity where only finite values are allowed."""


class IoFailure(RestoreEvalError):
    """Underlying OS read or write failed."""


class ParseError(RestoreEvalError):
    """A manifest line is not valid JSON or lacks required fields."""


class ValidationError(RestoreEvalError):
    """Manifest content violates catalog consistency rules.

    Carries the full list of violations so a caller can report
    everything at once instead of fixing entries one by one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# --- metric preconditions ------------------------------------------------------

class MetricError(RestoreEvalError):
    """A metric's input contract was violated."""


class DimensionMismatch(MetricError):
    """Two inputs disagree on feature dimension or channel count."""


class TooFewSamples(MetricError):
    """Not enough rows to estimate the requested statistic."""


class IndefiniteCovariance(MetricError):
    """Covariance eigenvalues are negative beyond numerical tolerance."""


class InsufficientFrames(MetricError):
    """Fewer frames than the batch policy requires."""


class ShapeMismatch(MetricError):
    """Feature stacks disagree on layer ids or layer shapes."""


class EmptySequence(MetricError):
    """An input sequence has no elements."""


class EmptySeries(MetricError):
    """A time series has no usable samples."""


class InsufficientOverlap(MetricError):
    """No candidate alignment leaves enough overlapping samples."""


class ChannelMismatch(MetricError):
    """Two series share no channels after exclusions."""


class MissingBaseline(MetricError):
    """A pairing requires a recording the catalog does not contain."""


class UnsupportedForm(MetricError):
    """The requested variant or mode is not implemented."""
