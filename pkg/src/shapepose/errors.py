"""Exception types raised by the shapepose pipeline."""


class ShapePoseError(Exception):
    """Base class for all shapepose domain errors."""


class BehindCameraError(ShapePoseError):
    """A point or object center lies at or behind the camera origin."""


class EmptyMaskError(ShapePoseError):
    """Rendering produced no foreground pixels inside the image."""


class NoSegmentError(ShapePoseError):
    """A label map contains no usable foreground segment."""


class ZeroAreaError(ShapePoseError):
    """Segment or model-shape area is zero; depth is undefined."""


class ConstantSignatureError(ShapePoseError):
    """A polar signature has zero variance; correlation is undefined.

    Signals a disk-like silhouette. Callers treat the correlation as 1
    and the in-plane angle as 0 (rotationally symmetric object).
    """


class DegenerateContourError(ShapePoseError):
    """Contour has fewer than 3 points; no polar signature exists."""


class FrustumError(ShapePoseError):
    """A generated pose leaves the object outside a camera frustum."""


class CalibrationError(ShapePoseError):
    """Calibration file is malformed or inconsistent."""


class LibraryFormatError(ShapePoseError):
    """Shape-library file is malformed or has an unsupported version."""


class ManifestError(ShapePoseError):
    """Workspace or dataset manifest is invalid or references missing files."""
