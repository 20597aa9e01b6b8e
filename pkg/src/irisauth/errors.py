"""Exception hierarchy shared by all pipeline stages."""


class IrisAuthError(Exception):
    """Base class for every error raised by this package."""


class ImageTooSmall(IrisAuthError):
    pass


class NoDarkPeak(IrisAuthError):
    pass


class EmptyPupil(IrisAuthError):
    pass


class NoEllipseFound(IrisAuthError):
    pass


class EmptyAnnulus(NoEllipseFound):
    """No edge points survive the annulus filter."""


class NoParabolaFound(IrisAuthError):
    pass


class DegenerateAxis(IrisAuthError):
    pass


class AccumulatorPeakNotFound(IrisAuthError):
    pass


class GeometryInvalid(IrisAuthError):
    pass


class InsufficientSupport(IrisAuthError):
    pass


class TooOccluded(IrisAuthError):
    pass


class InsufficientOverlap(IrisAuthError):
    pass


class NoIntersection(IrisAuthError):
    pass


class TangentLids(IrisAuthError):
    """Eyelid parabolas touch in a single point; rotation correction is skipped."""

    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


class CoincidentPoints(IrisAuthError):
    pass


class SpecInvalid(IrisAuthError):
    pass


class NoSeparation(IrisAuthError):
    pass


class SubjectUnknown(IrisAuthError):
    pass


class StoreCorrupt(IrisAuthError):
    pass


class CaptureExists(IrisAuthError):
    pass


class BadImageFile(IrisAuthError):
    pass


class PipelineError(IrisAuthError):
    """Wraps a stage failure with the stage name for diagnostics."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
