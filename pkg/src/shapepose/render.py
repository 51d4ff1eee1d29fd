"""Software silhouette renderer and the offline view-sphere shape library.

Rendering splats every visible point of a cloud as a Euclidean disk and
closes the result morphologically, producing a watertight binary
silhouette suited for contour tracing. The shape library stores, for a
fixed render distance ``z_m`` and camera, one entry per sphere view:
view angles, silhouette area, silhouette-centroid offset, and polar
signature.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .errors import BehindCameraError, EmptyMaskError, LibraryFormatError
from .geometry import (
    CameraIntrinsics,
    PointCloud,
    apply_transform,
    direction_to_view_angles,
    rigid,
    sphere_view_rotation,
)
from .masks import DEFAULT_SIGNATURE_LEN, silhouette_descriptor

DEFAULT_SPLAT_RADIUS = 2
DEFAULT_LIBRARY_RESOLUTION = (512, 512)
DEFAULT_FRAME_FILL = 0.6

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
_LIBRARY_MAGIC = b"SHPL"
_LIBRARY_VERSION = 1


def project_point(intr: CameraIntrinsics, p: np.ndarray) -> tuple[float, float]:
    """Pinhole projection of a single camera-frame point to pixel coords."""
    p = np.asarray(p, dtype=float)
    if p[2] <= 0.0:
        raise BehindCameraError(f"cannot project point with z={p[2]!r}")
    cx, cy = intr.principal_point
    f = intr.focal_length
    return cx + f * p[0] / p[2], cy + f * p[1] / p[2]


def project_points(intr: CameraIntrinsics, pts: np.ndarray) -> np.ndarray:
    """Vectorized pinhole projection; caller filters z <= 0 beforehand."""
    pts = np.asarray(pts, dtype=float)
    cx, cy = intr.principal_point
    f = intr.focal_length
    out = np.empty((len(pts), 2))
    out[:, 0] = cx + f * pts[:, 0] / pts[:, 2]
    out[:, 1] = cy + f * pts[:, 1] / pts[:, 2]
    return out


def disk_kernel(radius: int) -> np.ndarray:
    """Euclidean disk structuring element: dx^2 + dy^2 <= r^2."""
    y, x = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    return (x * x + y * y <= radius * radius).astype(np.uint8)


def render_silhouette(
    cloud: PointCloud | np.ndarray,
    pose: np.ndarray,
    intr: CameraIntrinsics,
    splat_radius: int = DEFAULT_SPLAT_RADIUS,
) -> np.ndarray:
    """Binary silhouette (uint8, 0/255) of a posed point cloud.

    The mask is the union of disks of ``splat_radius`` around each
    projected point, followed by a morphological closing with the same
    disk. Deterministic for identical inputs.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, float)
    pts = apply_transform(pose, pts)
    front = pts[:, 2] > 1e-12
    if not front.any():
        raise EmptyMaskError("no points in front of the camera")
    uv = project_points(intr, pts[front])
    iu = np.rint(uv[:, 0]).astype(int)
    iv = np.rint(uv[:, 1]).astype(int)
    w, h = intr.resolution
    inside = (iu >= 0) & (iu < w) & (iv >= 0) & (iv < h)
    if not inside.any():
        raise EmptyMaskError("no point projects inside the image")
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[iv[inside], iu[inside]] = 255
    if splat_radius > 0:
        kernel = disk_kernel(splat_radius)
        mask = cv2.dilate(mask, kernel)
        mask = cv2.morphologyEx(mask, cv2.MORPH_CLOSE, kernel)
    return mask


@dataclass(frozen=True)
class ViewSample:
    """A virtual camera position on the view sphere."""

    theta1: float
    theta2: float
    distance: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError("view distance must be positive")

    def direction(self) -> np.ndarray:
        """Unit vector from the model center to the camera (model frame)."""
        rs = sphere_view_rotation(self.theta1, self.theta2)
        return -(rs.T @ np.array([0.0, 0.0, 1.0]))


def sample_viewsphere(n: int, view_distance: float = 1.0) -> list[ViewSample]:
    """Approximately uniform view directions via a Fibonacci sphere lattice."""
    if n < 2:
        raise ValueError("need at least 2 view samples")
    samples = []
    for i in range(n):
        y = 1.0 - 2.0 * (i + 0.5) / n
        r = math.sqrt(max(0.0, 1.0 - y * y))
        phi = i * _GOLDEN_ANGLE
        u = np.array([r * math.cos(phi), y, r * math.sin(phi)])
        theta1, theta2 = direction_to_view_angles(u)
        samples.append(ViewSample(theta1, theta2, view_distance))
    return samples


def fit_focal_length(
    diameter: float,
    z_m: float,
    resolution: tuple[int, int],
    fill: float = DEFAULT_FRAME_FILL,
) -> float:
    """Focal length framing an object of ``diameter`` at ``fill`` of image height."""
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    return fill * min(resolution) * z_m / diameter


@dataclass
class ShapeLibrary:
    """Precomputed silhouettes of one object class over the view sphere.

    Arrays are indexed by view: ``thetas[i] = (theta1, theta2)``,
    ``areas[i]`` the silhouette pixel count, ``centroid_offsets[i]`` the
    silhouette centroid minus the principal point (px), ``signatures[i]``
    the polar signature. All views share ``z_m`` and the render camera.
    """

    class_id: int
    z_m: float
    intrinsics: CameraIntrinsics
    splat_radius: int
    thetas: np.ndarray
    areas: np.ndarray
    centroid_offsets: np.ndarray
    signatures: np.ndarray
    _match_cache: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.areas = np.asarray(self.areas, dtype=np.int64)
        self.centroid_offsets = np.asarray(self.centroid_offsets, dtype=float)
        self.signatures = np.asarray(self.signatures, dtype=float)
        n = len(self.thetas)
        if n < 1:
            raise ValueError("shape library needs at least one view")
        if self.signatures.ndim != 2 or self.signatures.shape[0] != n:
            raise ValueError("signature matrix does not match view count")
        if self.signatures.shape[1] < 8:
            raise ValueError("signatures are empty")
        if len(self.areas) != n or len(self.centroid_offsets) != n:
            raise ValueError("per-view arrays disagree on view count")
        if not self.z_m > 0:
            raise ValueError("z_m must be positive")

    @property
    def n_views(self) -> int:
        return len(self.thetas)

    @property
    def signature_len(self) -> int:
        return self.signatures.shape[1]

    def view(self, i: int) -> ViewSample:
        return ViewSample(self.thetas[i, 0], self.thetas[i, 1], self.z_m)

    def save(self, path: str | Path) -> None:
        """Write the versioned binary container (layout in README)."""
        path = Path(path)
        w, h = self.intrinsics.resolution
        cx, cy = self.intrinsics.principal_point
        header = _LIBRARY_MAGIC + struct.pack(
            "<IIIIIdddd II",
            _LIBRARY_VERSION,
            self.class_id,
            self.n_views,
            self.signature_len,
            self.splat_radius,
            self.z_m,
            self.intrinsics.focal_length,
            cx,
            cy,
            int(w),
            int(h),
        )
        blob = b"".join(
            [
                header,
                np.ascontiguousarray(self.thetas[:, 0], "<f8").tobytes(),
                np.ascontiguousarray(self.thetas[:, 1], "<f8").tobytes(),
                np.ascontiguousarray(self.areas, "<u8").tobytes(),
                np.ascontiguousarray(self.centroid_offsets, "<f8").tobytes(),
                np.ascontiguousarray(self.signatures, "<f8").tobytes(),
            ]
        )
        path.write_bytes(blob)

    @classmethod
    def load(cls, path: str | Path) -> "ShapeLibrary":
        data = Path(path).read_bytes()
        if data[:4] != _LIBRARY_MAGIC:
            raise LibraryFormatError(f"{path}: not a shape-library file")
        fmt = "<IIIIIdddd II"
        head = struct.calcsize(fmt)
        (
            version,
            class_id,
            n_views,
            sig_len,
            splat_radius,
            z_m,
            focal,
            cx,
            cy,
            w,
            h,
        ) = struct.unpack(fmt, data[4 : 4 + head])
        if version != _LIBRARY_VERSION:
            raise LibraryFormatError(f"{path}: unsupported version {version}")
        offset = 4 + head
        expected = offset + 8 * (n_views * (5 + sig_len))
        if len(data) != expected:
            raise LibraryFormatError(
                f"{path}: truncated library ({len(data)} bytes, expected {expected})"
            )

        def take(count):
            nonlocal offset
            arr = np.frombuffer(data, "<f8", count=count, offset=offset)
            offset += 8 * count
            return arr

        theta1 = take(n_views)
        theta2 = take(n_views)
        areas = np.frombuffer(data, "<u8", count=n_views, offset=offset).astype(
            np.int64
        )
        offset += 8 * n_views
        offsets = take(2 * n_views).reshape(n_views, 2)
        signatures = take(n_views * sig_len).reshape(n_views, sig_len)
        intr = CameraIntrinsics(focal, (cx, cy), (w, h))
        return cls(
            class_id=class_id,
            z_m=z_m,
            intrinsics=intr,
            splat_radius=splat_radius,
            thetas=np.column_stack([theta1, theta2]),
            areas=areas,
            centroid_offsets=offsets,
            signatures=signatures,
        )


def build_shape_library(
    cloud: PointCloud,
    class_id: int,
    n_views: int,
    z_m: float,
    intr: CameraIntrinsics,
    splat_radius: int = DEFAULT_SPLAT_RADIUS,
    signature_len: int = DEFAULT_SIGNATURE_LEN,
    max_workers: int = 1,
) -> ShapeLibrary:
    """Render all sphere views of ``cloud`` at distance ``z_m``.

    The model is expected to be roughly centered in its own frame; views
    place it on-axis via T(0, 0, z_m) . R_s(theta1, theta2). Raises
    :class:`EmptyMaskError` (with the view index) if a view renders
    outside the image.
    """
    samples = sample_viewsphere(n_views, z_m)
    principal = np.asarray(intr.principal_point, dtype=float)

    def render_one(item):
        i, vs = item
        pose = rigid(sphere_view_rotation(vs.theta1, vs.theta2), (0.0, 0.0, z_m))
        try:
            mask = render_silhouette(cloud, pose, intr, splat_radius)
            return silhouette_descriptor(mask, signature_len)
        except EmptyMaskError as exc:
            raise EmptyMaskError(f"view {i} ({vs.theta1:.1f}, {vs.theta2:.1f}): {exc}")

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(render_one, enumerate(samples)))
    else:
        results = [render_one(item) for item in enumerate(samples)]

    thetas = np.array([[vs.theta1, vs.theta2] for vs in samples])
    areas = np.array([r[0] for r in results], dtype=np.int64)
    offsets = np.array([r[1] - principal for r in results])
    signatures = np.array([r[2] for r in results])
    return ShapeLibrary(
        class_id=class_id,
        z_m=z_m,
        intrinsics=intr,
        splat_radius=splat_radius,
        thetas=thetas,
        areas=areas,
        centroid_offsets=offsets,
        signatures=signatures,
    )
