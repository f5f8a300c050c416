"""Exception hierarchy shared across the package.

Every deliberate failure raises a subclass of :class:`XmrcError`, so callers
(CLI, service, fuzz harnesses) can catch one base type and still report the
specific contract that was violated via the class name.
"""


class XmrcError(Exception):
    """Base class for all typed errors raised by this package."""


# --- value-type construction / shape contracts ---

class ShapeMismatch(XmrcError):
    def __init__(self, expected, got):
        super().__init__(f"shape mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class InvalidSample(XmrcError):
    """A complex sample is NaN or infinite."""


class InvalidDimensions(XmrcError):
    """Grid dimensions outside the allowed range."""


class EmptyMask(XmrcError):
    """Sampling mask with no sampled cell (rate must be > 0)."""


class InvalidMaskCell(XmrcError):
    """Mask cell outside {0, 1}."""


class UnnormalizedMaps(XmrcError):
    """Coil maps violate the sum-of-squares normalization on their support."""


# --- transforms ---

class LevelsTooDeep(XmrcError):
    """Frame decomposition depth exceeds what the grid size supports."""


class SubbandCountMismatch(XmrcError):
    """Coefficient set inconsistent with the frame that claims to have produced it."""


class NegativeThreshold(XmrcError):
    """Soft-threshold called with tau < 0."""


# --- sampling ---

class UnreachableRate(XmrcError):
    """Mask generator cannot achieve the target rate within its tolerance band."""


class RateBelowCenterBlock(XmrcError):
    """Cartesian center block alone already exceeds the target rate band."""


# --- metrics / phantoms ---

class ZeroGroundTruth(XmrcError):
    """RLNE undefined for an all-zero ground truth."""


class TooSmall(XmrcError):
    """Phantom dimensions below the supported minimum."""


class InsufficientACS(XmrcError):
    """Not enough fully sampled center rows to calibrate coil maps."""


# --- container format ---

class ContainerError(XmrcError):
    """Base class for container encode/decode failures."""


class BadMagic(ContainerError):
    pass


class UnsupportedVersion(ContainerError):
    pass


class BadHeader(ContainerError):
    """Unknown kind byte, nonzero reserved byte, or inconsistent dims."""


class TruncatedPayload(ContainerError):
    pass


class TrailingBytes(ContainerError):
    pass


class InvalidMaskByte(ContainerError):
    pass


class NonFiniteSample(ContainerError):
    pass


# --- solver / service ---

class InvalidParams(XmrcError):
    """Solver parameters outside their documented ranges."""


class ServiceError(XmrcError):
    """Base class for service-level failures; `code` is the wire error code."""

    http_status = 400

    @property
    def code(self):
        return type(self).__name__


class Unauthorized(ServiceError):
    http_status = 401


class UnknownDataId(ServiceError):
    http_status = 404


class UnknownJob(ServiceError):
    http_status = 404


class KindMismatch(ServiceError):
    http_status = 400


class MissingACS(ServiceError):
    http_status = 400


class MalformedContainer(ServiceError):
    http_status = 400


class TooLarge(ServiceError):
    http_status = 413


class NotReady(ServiceError):
    http_status = 409


class JobFailed(ServiceError):
    http_status = 409


class NoErrorMap(ServiceError):
    http_status = 404


class IllegalTransition(ServiceError):
    """Job state machine asked to skip or reverse a state."""
    http_status = 500
