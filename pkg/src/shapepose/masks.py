"""Label-map analysis: segments, contours, and polar shape signatures.

A label map is a 2D uint8 array whose pixel values are object class ids
(0 = background). Segments are maximal 8-connected foreground regions;
each carries a class vote, centroid, area, outer contour, and a polar
signature (contour distance from the centroid as a function of angle,
resampled to a fixed number of bins).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np

from .errors import DegenerateContourError, EmptyMaskError, NoSegmentError

DEFAULT_SIGNATURE_LEN = 360
DEFAULT_MIN_AREA = 50


@dataclass
class Segment:
    """Connected pixel region extracted from a label map.

    ``pixels`` holds (rows, cols) index arrays; ``centroid`` is the mean
    pixel position in absolute (x, y) image coordinates. ``contour`` and
    ``signature`` stay None until filled by :func:`extract_segments`.
    """

    pixels: tuple[np.ndarray, np.ndarray]
    area: int
    centroid: np.ndarray
    class_id: int | None = None
    contour: np.ndarray | None = None
    signature: np.ndarray | None = field(default=None, repr=False)

    def bounding_box(self) -> tuple[int, int, int, int]:
        """(row0, col0, row1, col1), half-open."""
        rows, cols = self.pixels
        return (
            int(rows.min()),
            int(cols.min()),
            int(rows.max()) + 1,
            int(cols.max()) + 1,
        )

    def component_mask(self, pad: int = 1) -> tuple[np.ndarray, tuple[int, int]]:
        """Cropped 0/255 mask of this segment plus the (row, col) origin."""
        r0, c0, r1, c1 = self.bounding_box()
        r0, c0 = max(0, r0 - pad), max(0, c0 - pad)
        mask = np.zeros((r1 + pad - r0, c1 + pad - c0), dtype=np.uint8)
        mask[self.pixels[0] - r0, self.pixels[1] - c0] = 255
        return mask, (r0, c0)


def connected_components(label_map: np.ndarray, min_area: int = 1) -> list[Segment]:
    """Maximal 8-connected foreground regions with area >= ``min_area``.

    Foreground is any nonzero label; regions may span class boundaries
    (the class is decided afterwards by :func:`vote_class`). Contours and
    signatures are left unfilled.
    """
    label_map = np.asarray(label_map)
    if label_map.ndim != 2:
        raise ValueError("label map must be a 2D array")
    fg = (label_map != 0).astype(np.uint8)
    n, labels, stats, _ = cv2.connectedComponentsWithStats(fg, connectivity=8)
    segments = []
    for i in range(1, n):
        area = int(stats[i, cv2.CC_STAT_AREA])
        if area < min_area:
            continue
        rows, cols = np.nonzero(labels == i)
        centroid = np.array([cols.mean(), rows.mean()])
        segments.append(Segment(pixels=(rows, cols), area=area, centroid=centroid))
    return segments


def vote_class(segment: Segment, label_map: np.ndarray) -> int:
    """Modal nonzero label over the segment's pixels; ties take the smaller id."""
    rows, cols = segment.pixels
    counts = np.bincount(np.asarray(label_map)[rows, cols].ravel())
    counts[0] = 0
    if counts.sum() == 0:
        raise NoSegmentError("segment covers no labeled foreground pixels")
    return int(np.argmax(counts))


def centroid(
    segment: Segment, principal_point: tuple[float, float] = (0.0, 0.0)
) -> np.ndarray:
    """Mean pixel position (x, y) shifted to be relative to the principal point."""
    if segment.area <= 0:
        raise ValueError("segment has zero area")
    return segment.centroid - np.asarray(principal_point, dtype=float)


def trace_contour(mask: np.ndarray) -> np.ndarray:
    """Ordered outer border of the largest component of a binary mask.

    Returns an (k, 2) int array of (x, y) pixels forming a closed
    8-connected loop; inner borders (holes) are ignored.
    """
    mask = np.asarray(mask)
    binary = (mask != 0).astype(np.uint8)
    if not binary.any():
        raise EmptyMaskError("cannot trace the contour of an empty mask")
    n, labels, stats, _ = cv2.connectedComponentsWithStats(binary, connectivity=8)
    if n > 2:
        largest = 1 + int(np.argmax(stats[1:, cv2.CC_STAT_AREA]))
        binary = (labels == largest).astype(np.uint8)
    contours, _ = cv2.findContours(binary, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE)
    return contours[0].reshape(-1, 2)


def polar_signature(
    contour: np.ndarray,
    center: np.ndarray,
    n_samples: int = DEFAULT_SIGNATURE_LEN,
) -> np.ndarray:
    """Contour distance from ``center`` sampled over ``n_samples`` angle bins.

    Bins cover [0, 360) uniformly. Where several contour points fall into
    one bin (non-star-convex shapes) the maximum distance is kept; empty
    bins are filled by circular linear interpolation between their filled
    neighbors.
    """
    if n_samples < 8:
        raise ValueError("signature needs at least 8 samples")
    pts = np.asarray(contour, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise DegenerateContourError(
            f"contour with {len(pts)} points has no usable signature"
        )
    d = pts - np.asarray(center, dtype=float)
    radius = np.hypot(d[:, 0], d[:, 1])
    phi = np.arctan2(d[:, 1], d[:, 0])
    step = 2.0 * np.pi / n_samples
    bins = np.rint(phi / step).astype(int) % n_samples

    samples = np.full(n_samples, -1.0)
    np.maximum.at(samples, bins, radius)
    filled = np.flatnonzero(samples >= 0.0)
    if len(filled) < n_samples:
        # circular interpolation across empty bins
        xp = np.concatenate(([filled[-1] - n_samples], filled, [filled[0] + n_samples]))
        fp = np.concatenate(([samples[filled[-1]]], samples[filled], [samples[filled[0]]]))
        empty = np.flatnonzero(samples < 0.0)
        samples[empty] = np.interp(empty, xp, fp)
    return samples


def extract_segments(
    label_map: np.ndarray,
    min_area: int = DEFAULT_MIN_AREA,
    signature_len: int = DEFAULT_SIGNATURE_LEN,
) -> list[Segment]:
    """Full segment pipeline: components, class vote, contour, signature.

    Returns segments sorted by area, largest first. Segments whose
    contour degenerates (under 3 points) are dropped.
    """
    label_map = np.asarray(label_map)
    segments = connected_components(label_map, min_area=min_area)
    out = []
    for seg in segments:
        seg.class_id = vote_class(seg, label_map)
        mask, (r0, c0) = seg.component_mask()
        contour = trace_contour(mask) + np.array([c0, r0])
        try:
            seg.signature = polar_signature(contour, seg.centroid, signature_len)
        except DegenerateContourError:
            continue
        seg.contour = contour
        out.append(seg)
    out.sort(key=lambda s: -s.area)
    return out


def mask_area(mask: np.ndarray) -> int:
    """Number of foreground pixels."""
    return int(np.count_nonzero(mask))


def silhouette_descriptor(
    mask: np.ndarray, signature_len: int = DEFAULT_SIGNATURE_LEN
) -> tuple[int, np.ndarray, np.ndarray]:
    """(area, centroid, signature) of the largest component of a mask.

    The same reduction applied to library renders and to re-rendered
    hypothesis silhouettes, keeping both sides of the matching symmetric.
    """
    mask = np.asarray(mask)
    binary = (mask != 0).astype(np.uint8)
    if not binary.any():
        raise EmptyMaskError("mask has no foreground pixels")
    n, labels, stats, _ = cv2.connectedComponentsWithStats(binary, connectivity=8)
    largest = 1 + int(np.argmax(stats[1:, cv2.CC_STAT_AREA]))
    area = int(stats[largest, cv2.CC_STAT_AREA])
    component = (labels == largest).astype(np.uint8)
    rows, cols = np.nonzero(component)
    # same arithmetic as Segment.centroid so segment and model shapes match
    center = np.array([cols.mean(), rows.mean()])
    contour = trace_contour(component)
    return area, center, polar_signature(contour, center, signature_len)
