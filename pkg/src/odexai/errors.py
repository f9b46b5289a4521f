"""Exception hierarchy shared across the package."""


class OdexaiError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVectorError(OdexaiError):
    """Cosine similarity requested for a vector with zero norm."""


class DimensionMismatchError(OdexaiError):
    """Operands do not share the required width/height."""


class TooManySegmentsError(OdexaiError):
    """More superpixels requested than there are pixels."""


class BackendUnavailableError(OdexaiError):
    """Detector backend process died or the handshake failed."""


class ProtocolViolationError(OdexaiError):
    """Detector backend sent a frame that violates the wire protocol."""


class BackendTimeoutError(OdexaiError):
    """Detector backend did not answer a batch within the deadline."""


class FormatError(OdexaiError):
    """Tensor bundle has a bad magic, rank, dimension, or is truncated."""


class NonFiniteTensorError(OdexaiError):
    """Tensor bundle contains NaN or Inf values."""


class CaptureMismatchError(OdexaiError):
    """White-box capture geometry does not cover the explanation target."""


class ZeroEnergyError(OdexaiError):
    """Saliency map has zero total energy; the metric is undefined."""


class EmptySampleError(OdexaiError):
    """An accuracy ratio was requested over an empty sample."""


class EmptyGroupError(OdexaiError):
    """Aggregation requested for a group with no records."""


class BadDomainError(OdexaiError):
    """Curve abscissae are not strictly increasing over [0, 1]."""


class ParseError(OdexaiError):
    """Dataset annotation file could not be parsed."""


class MissingImageError(OdexaiError):
    """Dataset references an image file that does not exist."""


class ArtifactNotFoundError(OdexaiError):
    """Requested artifact ref is not present in the store."""
