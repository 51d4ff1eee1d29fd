"""Rigid transforms, rotations, camera models, and pose composition.

Conventions used throughout the package:

* Camera looks along +z; image x right, image y down. Points with z <= 0
  are behind the camera.
* Rotations are 3x3 orthonormal matrices with det +1; rigid transforms
  are 4x4 homogeneous matrices applied to column vectors.
* Angles are degrees at API boundaries and radians internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import BehindCameraError

ROTATION_TOL = 1e-9

_Z_AXIS = np.array([0.0, 0.0, 1.0])


def _deg2rad(deg: float) -> float:
    return deg * math.pi / 180.0


def rotation_x(deg: float) -> np.ndarray:
    """Right-handed rotation about the x axis by ``deg`` degrees."""
    a = _deg2rad(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(deg: float) -> np.ndarray:
    """Right-handed rotation about the y axis by ``deg`` degrees."""
    a = _deg2rad(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(deg: float) -> np.ndarray:
    """Right-handed rotation about the z axis by ``deg`` degrees."""
    a = _deg2rad(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_about_axis(axis: np.ndarray, deg: float) -> np.ndarray:
    """Rodrigues rotation about an arbitrary unit axis by ``deg`` degrees."""
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("rotation axis must be nonzero")
    n = n / norm
    a = _deg2rad(deg)
    c, s = math.cos(a), math.sin(a)
    k = np.array(
        [
            [0.0, -n[2], n[1]],
            [n[2], 0.0, -n[0]],
            [-n[1], n[0], 0.0],
        ]
    )
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def is_rotation(r: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    """True if ``r`` is orthonormal with det +1 within ``tol``."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    if not np.allclose(r.T @ r, np.eye(3), atol=tol):
        return False
    return abs(np.linalg.det(r) - 1.0) <= tol


def rotation_angle_deg(r: np.ndarray) -> float:
    """Rotation angle in degrees extracted via the trace formula."""
    t = (np.trace(r) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, t))))


def sphere_view_rotation(theta1: float, theta2: float) -> np.ndarray:
    """Rotation placing the model as seen from sphere point (theta1, theta2).

    theta1 is the longitude (about the y axis) and theta2 the latitude
    (about the x axis): R_s = R_x(theta2) @ R_y(theta1). The reference
    view (0, 0) is the identity. Library generation and pose composition
    must share this convention; round-trip tests enforce it.
    """
    return rotation_x(theta2) @ rotation_y(theta1)


def inplane_rotation(theta3: float) -> np.ndarray:
    """Rotation about the camera optical axis (+z) by theta3 degrees."""
    return rotation_z(theta3)


def view_direction(theta1: float, theta2: float) -> np.ndarray:
    """Unit vector from the model center to the virtual camera.

    Expressed in the model frame: the camera that renders view
    (theta1, theta2) sits at ``view_distance * view_direction(...)``.
    """
    rs = sphere_view_rotation(theta1, theta2)
    return -(rs.T @ _Z_AXIS)


def direction_to_view_angles(direction: np.ndarray) -> tuple[float, float]:
    """Inverse of :func:`view_direction`; returns angles in [0, 360)."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    theta2 = math.degrees(math.asin(min(1.0, max(-1.0, -u[1]))))
    theta1 = math.degrees(math.atan2(u[0], -u[2]))
    return theta1 % 360.0, theta2 % 360.0


def correction_rotation(object_center: np.ndarray) -> np.ndarray:
    """Rotation correcting perspective effects for an off-axis object.

    Returns the minimal rotation carrying the optical axis onto the ray
    through ``object_center``: axis = normalize(z x d), angle =
    arccos(z . d) with d the unit ray to the center. An on-axis center
    yields the identity.
    """
    c = np.asarray(object_center, dtype=float)
    if c.shape != (3,):
        raise ValueError("object center must be a 3-vector")
    if c[2] <= 0.0:
        raise BehindCameraError(
            f"object center must have positive depth, got z={c[2]!r}"
        )
    d = c / np.linalg.norm(c)
    axis = np.array([-d[1], d[0], 0.0])  # z x d
    sin_a = np.linalg.norm(axis)
    if sin_a < 1e-15:
        return np.eye(3)
    cos_a = min(1.0, max(-1.0, d[2]))
    angle = math.degrees(math.atan2(sin_a, cos_a))
    return rotation_about_axis(axis / sin_a, angle)


def rigid(rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
    """4x4 homogeneous transform from a 3x3 rotation and a translation."""
    t = np.eye(4)
    t[:3, :3] = rotation
    t[:3, 3] = np.asarray(translation, dtype=float)
    return t


def invert_rigid(transform: np.ndarray) -> np.ndarray:
    """Closed-form inverse of a rigid 4x4 transform."""
    r = transform[:3, :3]
    t = transform[:3, 3]
    out = np.eye(4)
    out[:3, :3] = r.T
    out[:3, 3] = -(r.T @ t)
    return out


def compose_pose(
    translation: np.ndarray,
    rc: np.ndarray,
    ri: np.ndarray,
    rs: np.ndarray,
) -> np.ndarray:
    """Pose matrix P = T . Rc . Ri . Rs (applied right to left)."""
    return rigid(rc @ ri @ rs, translation)


def apply_transform(transform: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply a rigid 4x4 transform to an (m, 3) array of points."""
    pts = np.asarray(points, dtype=float)
    return pts @ transform[:3, :3].T + transform[:3, 3]


def _diameter_of(points: np.ndarray) -> float:
    """Max pairwise distance; exact via convex hull vertices."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 1:
        return 0.0
    hull_pts = pts
    if len(pts) > 4:
        try:
            hull_pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            # Degenerate (coplanar/collinear) cloud: fall back to all points,
            # chunked so memory stays bounded.
            pass
    best = 0.0
    chunk = 1024
    for i in range(0, len(hull_pts), chunk):
        block = hull_pts[i : i + chunk]
        d2 = np.sum((block[:, None, :] - hull_pts[None, :, :]) ** 2, axis=-1)
        best = max(best, float(d2.max()))
    return math.sqrt(best)


@dataclass(frozen=True)
class PointCloud:
    """Ordered set of 3D points for an object model.

    ``diameter`` (max pairwise point distance) is computed once on
    construction unless supplied, e.g. when carrying it across a rigid
    transform.
    """

    points: np.ndarray
    diameter: float = field(default=-1.0)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) == 0:
            raise ValueError("point cloud must be a nonempty (m, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)
        if self.diameter < 0.0:
            object.__setattr__(self, "diameter", _diameter_of(pts))

    def __len__(self) -> int:
        return len(self.points)

    def centered(self) -> "PointCloud":
        """Copy translated so the centroid sits at the origin."""
        return PointCloud(self.points - self.points.mean(axis=0), self.diameter)


def transform_cloud(pose: np.ndarray, cloud: PointCloud) -> PointCloud:
    """Transform a cloud rigidly; cardinality and diameter are preserved."""
    return PointCloud(apply_transform(pose, cloud.points), cloud.diameter)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal length, principal point, resolution (px)."""

    focal_length: float
    principal_point: tuple[float, float]
    resolution: tuple[int, int]

    def __post_init__(self):
        if not self.focal_length > 0:
            raise ValueError("focal length must be positive")
        w, h = self.resolution
        cx, cy = self.principal_point
        if not (0 <= cx < w and 0 <= cy < h):
            raise ValueError("principal point must lie inside the image")

    @property
    def width(self) -> int:
        return int(self.resolution[0])

    @property
    def height(self) -> int:
        return int(self.resolution[1])


@dataclass(frozen=True)
class CameraExtrinsics:
    """Rigid world-to-camera transform."""

    world_to_camera: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.world_to_camera, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("extrinsics must be a 4x4 matrix")
        if not is_rotation(m[:3, :3], tol=1e-6):
            raise ValueError("extrinsics rotation block is not orthonormal")
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError("extrinsics bottom row must be [0 0 0 1]")
        object.__setattr__(self, "world_to_camera", m)

    def inverse(self) -> np.ndarray:
        return invert_rigid(self.world_to_camera)


@dataclass(frozen=True)
class Camera:
    """A calibrated camera: intrinsics plus world-to-camera extrinsics."""

    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics


def change_camera(
    e1: CameraExtrinsics, e2: CameraExtrinsics, cloud: PointCloud
) -> PointCloud:
    """Re-express a camera-1 cloud in camera-2 coordinates: E2 . E1^-1."""
    m = e2.world_to_camera @ e1.inverse()
    return transform_cloud(m, cloud)


def look_at(
    position: np.ndarray, target: np.ndarray, up: np.ndarray
) -> CameraExtrinsics:
    """Extrinsics for a camera at ``position`` looking toward ``target``.

    Camera z points at the target; y is chosen so the world ``up``
    direction maps to image-up (negative image y).
    """
    position = np.asarray(position, dtype=float)
    z = np.asarray(target, dtype=float) - position
    z = z / np.linalg.norm(z)
    up = np.asarray(up, dtype=float)
    x = np.cross(-up, z)
    nx = np.linalg.norm(x)
    if nx < 1e-12:
        raise ValueError("up direction is parallel to the viewing direction")
    x = x / nx
    y = np.cross(z, x)
    r = np.vstack([x, y, z])
    return CameraExtrinsics(rigid(r, -(r @ position)))


@dataclass(frozen=True)
class EulerView:
    """View-sphere angles (theta1, theta2) plus in-plane angle theta3.

    All angles normalized to [0, 360) degrees.
    """

    theta1: float
    theta2: float
    theta3: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta1", float(self.theta1) % 360.0)
        object.__setattr__(self, "theta2", float(self.theta2) % 360.0)
        object.__setattr__(self, "theta3", float(self.theta3) % 360.0)
