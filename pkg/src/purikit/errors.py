"""Exception types shared across the package."""


class PurikitError(Exception):
    """Base class for all purikit errors."""


class InvalidDimensions(PurikitError):
    pass


class UnsupportedFormat(PurikitError):
    pass


class WrongChannelCount(PurikitError):
    pass


class ShapeMismatch(PurikitError):
    pass


class TooSmall(PurikitError):
    pass


class QualityOutOfRange(PurikitError):
    pass


class EncodeError(PurikitError):
    pass


class MalformedStream(PurikitError):
    pass


class UnsupportedJpegFeature(PurikitError):
    pass


class ZeroPerturbation(PurikitError):
    pass


class EpsilonOutOfRange(PurikitError):
    pass


class MaskShapeMismatch(PurikitError):
    pass


class InvalidEllipse(PurikitError):
    pass


class BackendUnavailable(PurikitError):
    pass


class BackendFailed(PurikitError):
    """An external subprocess backend misbehaved (nonzero exit, bad output)."""

    def __init__(self, message, exit_code=None, stderr=""):
        super().__init__(message)
        self.exit_code = exit_code
        self.stderr = stderr


class BackendTimeout(PurikitError):
    pass


class BackendProtocolError(PurikitError):
    pass


class ScaleContractViolated(PurikitError):
    pass


class ScaleMismatch(PurikitError):
    """A super-resolution scale does not match the pipeline down factor."""

    def __init__(self, role, expected, actual):
        super().__init__(f"{role} SR scale must be {expected}, got {actual}")
        self.role = role
        self.expected = expected
        self.actual = actual


class PairingError(PurikitError):
    pass
