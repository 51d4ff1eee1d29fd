"""Procedural desk-object point clouds for the synthetic benchmark.

Five surface-sampled models standing in for scanned desk objects, chosen
to span the difficulty spectrum: an anisotropic cuboid, an axially
symmetric bottle, a cup with a handle, a flat plate, and a thin
elongated spoon. Every builder is deterministic for a given seed and
returns a centroid-centered cloud.
"""

from __future__ import annotations

import numpy as np

from .geometry import PointCloud

CLASS_NAMES = {1: "box", 2: "bottle", 3: "cup", 4: "plate", 5: "spoon"}
CLASS_IDS = {name: cid for cid, name in CLASS_NAMES.items()}
DEFAULT_POINTS = 12000


def _finish(pts: np.ndarray) -> PointCloud:
    return PointCloud(np.asarray(pts) - np.asarray(pts).mean(axis=0))


def _sample_box_surface(rng, n, sx, sy, sz):
    """Uniform-by-area sampling of a cuboid surface centered at the origin."""
    areas = np.array([sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy])
    faces = rng.choice(6, size=n, p=areas / areas.sum())
    u = rng.uniform(-0.5, 0.5, size=n)
    v = rng.uniform(-0.5, 0.5, size=n)
    pts = np.empty((n, 3))
    half = np.array([sx, sy, sz]) / 2.0
    for f in range(6):
        sel = faces == f
        axis = f // 2
        sign = 1.0 if f % 2 == 0 else -1.0
        rest = [a for a in range(3) if a != axis]
        pts[sel, axis] = sign * half[axis]
        pts[sel, rest[0]] = u[sel] * (2 * half[rest[0]])
        pts[sel, rest[1]] = v[sel] * (2 * half[rest[1]])
    return pts


def _sample_cylinder_side(rng, n, radius, z0, z1, axis=2):
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    z = rng.uniform(z0, z1, size=n)
    pts = np.empty((n, 3))
    planar = [a for a in range(3) if a != axis]
    pts[:, planar[0]] = radius * np.cos(phi)
    pts[:, planar[1]] = radius * np.sin(phi)
    pts[:, axis] = z
    return pts


def _sample_disk(rng, n, r_in, r_out, z, axis=2):
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    r = np.sqrt(rng.uniform(r_in**2, r_out**2, size=n))
    pts = np.empty((n, 3))
    planar = [a for a in range(3) if a != axis]
    pts[:, planar[0]] = r * np.cos(phi)
    pts[:, planar[1]] = r * np.sin(phi)
    pts[:, axis] = z
    return pts


def _sample_cone_side(rng, n, r0, z0, r1, z1):
    """Lateral frustum surface from (r0, z0) to (r1, z1), area-weighted."""
    r = np.sqrt(rng.uniform(min(r0, r1) ** 2, max(r0, r1) ** 2, size=n))
    t = (r - r0) / (r1 - r0) if r1 != r0 else rng.uniform(0, 1, size=n)
    z = z0 + t * (z1 - z0)
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _sample_torus_arc(rng, n, center, major, minor, u0, u1):
    """Torus section in the x-z plane around ``center``; u from +x axis."""
    out = np.empty((0, 3))
    while len(out) < n:
        m = 2 * (n - len(out)) + 8
        u = rng.uniform(u0, u1, size=m)
        v = rng.uniform(0.0, 2 * np.pi, size=m)
        keep = rng.uniform(0.0, 1.0, size=m) <= (
            (major + minor * np.cos(v)) / (major + minor)
        )
        u, v = u[keep], v[keep]
        ring = major + minor * np.cos(v)
        pts = np.column_stack(
            [ring * np.cos(u), minor * np.sin(v), ring * np.sin(u)]
        ) + np.asarray(center)
        out = np.vstack([out, pts])
    return out[:n]


def _sample_ellipsoid(rng, n, a, b, c, z_max=None):
    """Surface of an axis-aligned ellipsoid, area-corrected by rejection."""
    out = np.empty((0, 3))
    w_max = max(a * b, b * c, a * c)
    while len(out) < n:
        m = 2 * (n - len(out)) + 8
        v = rng.normal(size=(m, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        w = np.sqrt(
            (b * c * v[:, 0]) ** 2 + (a * c * v[:, 1]) ** 2 + (a * b * v[:, 2]) ** 2
        )
        keep = rng.uniform(0.0, 1.0, size=m) <= w / w_max
        pts = v[keep] * np.array([a, b, c])
        if z_max is not None:
            pts = pts[pts[:, 2] <= z_max]
        out = np.vstack([out, pts])
    return out[:n]


def make_box(n_points: int = DEFAULT_POINTS, seed: int = 0) -> PointCloud:
    """Anisotropic cuboid, 1.6 x 1.1 x 0.7."""
    rng = np.random.default_rng([seed, CLASS_IDS["box"]])
    return _finish(_sample_box_surface(rng, n_points, 1.6, 1.1, 0.7))


def make_bottle(n_points: int = DEFAULT_POINTS, seed: int = 0) -> PointCloud:
    """Axially symmetric bottle: body, shoulder, neck, cap, base."""
    rng = np.random.default_rng([seed, CLASS_IDS["bottle"]])
    n_body = int(n_points * 0.62)
    n_shoulder = int(n_points * 0.14)
    n_neck = int(n_points * 0.12)
    n_cap = int(n_points * 0.04)
    n_base = n_points - n_body - n_shoulder - n_neck - n_cap
    parts = [
        _sample_cylinder_side(rng, n_body, 0.32, -1.00, 0.30),
        _sample_cone_side(rng, n_shoulder, 0.32, 0.30, 0.11, 0.62),
        _sample_cylinder_side(rng, n_neck, 0.11, 0.62, 0.95),
        _sample_disk(rng, n_cap, 0.0, 0.11, 0.95),
        _sample_disk(rng, n_base, 0.0, 0.32, -1.00),
    ]
    return _finish(np.vstack(parts))


def make_cup(n_points: int = DEFAULT_POINTS, seed: int = 0) -> PointCloud:
    """Open cylinder with a side handle."""
    rng = np.random.default_rng([seed, CLASS_IDS["cup"]])
    n_wall = int(n_points * 0.62)
    n_bottom = int(n_points * 0.14)
    n_handle = n_points - n_wall - n_bottom
    wall = _sample_cylinder_side(rng, n_wall, 0.46, -0.60, 0.60)
    bottom = _sample_disk(rng, n_bottom, 0.0, 0.46, -0.60)
    # half-torus handle in the x-z plane, attached at the +x wall
    handle = _sample_torus_arc(
        rng,
        n_handle,
        center=(0.40, 0.0, 0.0),
        major=0.34,
        minor=0.055,
        u0=-1.40,
        u1=1.40,
    )
    return _finish(np.vstack([wall, bottom, handle]))


def make_plate(n_points: int = DEFAULT_POINTS, seed: int = 0) -> PointCloud:
    """Shallow plate: flat base, conical rim, thin underside."""
    rng = np.random.default_rng([seed, CLASS_IDS["plate"]])
    n_base = int(n_points * 0.30)
    n_rim = int(n_points * 0.35)
    n_under_base = int(n_points * 0.15)
    n_under_rim = n_points - n_base - n_rim - n_under_base
    top = [
        _sample_disk(rng, n_base, 0.0, 0.45, 0.0),
        _sample_cone_side(rng, n_rim, 0.45, 0.0, 0.85, 0.18),
    ]
    under = [
        _sample_disk(rng, n_under_base, 0.0, 0.45, -0.05),
        _sample_cone_side(rng, n_under_rim, 0.45, -0.05, 0.85, 0.15),
    ]
    return _finish(np.vstack(top + under))


def make_spoon(n_points: int = DEFAULT_POINTS, seed: int = 0) -> PointCloud:
    """Thin elongated spoon: shallow ellipsoid bowl plus a slender stem."""
    rng = np.random.default_rng([seed, CLASS_IDS["spoon"]])
    n_bowl = int(n_points * 0.45)
    n_stem = n_points - n_bowl
    bowl = _sample_ellipsoid(rng, n_bowl, 0.24, 0.36, 0.11, z_max=0.03)
    bowl[:, 1] += 0.50
    stem = _sample_cylinder_side(rng, n_stem, 0.045, -1.05, 0.20, axis=1)
    return _finish(np.vstack([bowl, stem]))


CLASS_BUILDERS = {
    "box": make_box,
    "bottle": make_bottle,
    "cup": make_cup,
    "plate": make_plate,
    "spoon": make_spoon,
}


def make_model(name: str, n_points: int = DEFAULT_POINTS, seed: int = 0) -> PointCloud:
    """Build one of the named procedural models."""
    try:
        builder = CLASS_BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(CLASS_BUILDERS)}")
    return builder(n_points=n_points, seed=seed)
