"""Exception types shared across the package."""


class CubeTrackError(Exception):
    """Base class for all package-specific errors."""


class PointBehindCamera(CubeTrackError):
    pass


class DegenerateConfiguration(CubeTrackError):
    """Point configuration too degenerate to fit a homography."""


class NonInvertibleHomography(CubeTrackError):
    pass


class DictionaryExhausted(CubeTrackError):
    """Marker dictionary constraints unsatisfiable within the search budget."""


class UnknownMarker(CubeTrackError):
    pass


class CubeNotVisible(CubeTrackError):
    """No cube face oriented toward the camera."""


class NearBorder(CubeTrackError):
    """Corner too close to the image border for sub-pixel refinement."""


class DegenerateGeometry(CubeTrackError):
    """Correspondence set too degenerate to solve for a pose."""


class DivergedSolution(CubeTrackError):
    """Pose refinement ended with an implausibly large reprojection error."""


class InitialPoseFailed(CubeTrackError):
    """Step-1 pose estimation could not produce an initial estimate."""


class FaceNotVisible(CubeTrackError):
    pass


class SizeMismatch(CubeTrackError):
    pass


class LengthMismatch(CubeTrackError):
    pass


class TimestampGap(CubeTrackError):
    """Nearest-timestamp association exceeded the allowed half-period gap."""


class DegenerateCalibration(CubeTrackError):
    """Open/closed reference poses too close to define an actuation axis."""


class UndefinedMetric(CubeTrackError):
    """Classifier metric with a zero denominator."""


class SchemaViolation(CubeTrackError):
    """Malformed episode/dataset file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StepOutOfRange(CubeTrackError):
    pass


class EmptyBatch(CubeTrackError):
    pass


class NonFiniteLoss(CubeTrackError):
    """Training loss became NaN/inf; carries diagnostics in args."""
