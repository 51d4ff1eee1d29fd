"""Closed-loop synthetic scene generator: random poses, two-camera label
maps, and ground-truth pose files.

Scenes place a single object at a random 6D pose inside both camera
frusta (rejection sampling with a bounded retry budget), render both
label maps with the silhouette renderer, and record the exact pose. A
scene is fully determined by its seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrustumError
from .geometry import (
    Camera,
    PointCloud,
    apply_transform,
    invert_rigid,
    look_at,
    rigid,
    rotation_x,
    rotation_y,
    rotation_z,
    CameraIntrinsics,
)
from .io import write_calibration, write_pgm, write_pose_matrix
from .render import DEFAULT_SPLAT_RADIUS, project_points, render_silhouette

DATASET_MANIFEST_NAME = "manifest.json"
DATASET_CALIBRATION_NAME = "calibration.txt"


def default_rig(
    resolution: tuple[int, int] = (1024, 736),
    focal_length: float = 1000.0,
) -> dict[str, Camera]:
    """Two-camera rig: cam1 oblique over the desk, cam2 overhead."""
    intr = CameraIntrinsics(
        focal_length,
        ((resolution[0] - 1) / 2.0, (resolution[1] - 1) / 2.0),
        resolution,
    )
    cam1 = Camera(intr, look_at((-4.4, -4.5, 5.2), (0, 0, 0), (0, 0, 1)))
    cam2 = Camera(intr, look_at((0.3, 0.2, 8.1), (0, 0, 0), (0, 1, 0)))
    return {"cam1": cam1, "cam2": cam2}


@dataclass(frozen=True)
class PoseRanges:
    """Sampling ranges for ground-truth poses, in the camera-1 frame."""

    x: tuple[float, float] = (-0.9, 0.9)
    y: tuple[float, float] = (-0.7, 0.7)
    z: tuple[float, float] = (7.0, 9.2)
    euler1: tuple[float, float] = (0.0, 360.0)
    euler2: tuple[float, float] = (0.0, 360.0)
    euler3: tuple[float, float] = (0.0, 360.0)


@dataclass(frozen=True)
class SceneSpec:
    """Ground truth for one generated scene (pose in the cam1 frame)."""

    scene_id: str
    class_id: int
    class_name: str
    pose: np.ndarray
    seed_entropy: tuple[int, ...]
    splat_radius: int


def _inside_frustum(
    points: np.ndarray, camera: Camera, margin: float
) -> bool:
    if np.any(points[:, 2] <= 0.1):
        return False
    uv = project_points(camera.intrinsics, points)
    w, h = camera.intrinsics.resolution
    return bool(
        np.all(uv[:, 0] >= margin)
        and np.all(uv[:, 0] <= w - 1 - margin)
        and np.all(uv[:, 1] >= margin)
        and np.all(uv[:, 1] <= h - 1 - margin)
    )


def sample_pose(rng: np.random.Generator, ranges: PoseRanges) -> np.ndarray:
    """One random rigid pose: uniform Euler angles and translation."""
    a1 = rng.uniform(*ranges.euler1)
    a2 = rng.uniform(*ranges.euler2)
    a3 = rng.uniform(*ranges.euler3)
    t = np.array(
        [rng.uniform(*ranges.x), rng.uniform(*ranges.y), rng.uniform(*ranges.z)]
    )
    return rigid(rotation_z(a3) @ rotation_x(a2) @ rotation_y(a1), t)


def generate_scene(
    model: PointCloud,
    class_id: int,
    cameras: dict[str, Camera],
    rng: np.random.Generator,
    pose_ranges: PoseRanges = PoseRanges(),
    splat_radius: int = DEFAULT_SPLAT_RADIUS,
    scene_id: str = "scene",
    class_name: str = "",
    max_retries: int = 100,
    seed_entropy: tuple[int, ...] = (),
) -> tuple[np.ndarray, np.ndarray, SceneSpec]:
    """Label maps for both cameras plus the scene's ground truth.

    The pose is drawn from ``pose_ranges`` in the cam1 frame and
    resampled (up to ``max_retries``) until the whole object lies inside
    both frusta with a small pixel margin.
    """
    cam1, cam2 = list(cameras.values())[:2]
    to_cam2 = cam2.extrinsics.world_to_camera @ cam1.extrinsics.inverse()
    margin = splat_radius + 2
    for _ in range(max_retries):
        pose = sample_pose(rng, pose_ranges)
        pts1 = apply_transform(pose, model.points)
        if not _inside_frustum(pts1, cam1, margin):
            continue
        pts2 = apply_transform(to_cam2, pts1)
        if not _inside_frustum(pts2, cam2, margin):
            continue
        mask1 = render_silhouette(pts1, np.eye(4), cam1.intrinsics, splat_radius)
        mask2 = render_silhouette(pts2, np.eye(4), cam2.intrinsics, splat_radius)
        label1 = ((mask1 > 0) * class_id).astype(np.uint8)
        label2 = ((mask2 > 0) * class_id).astype(np.uint8)
        spec = SceneSpec(
            scene_id=scene_id,
            class_id=class_id,
            class_name=class_name,
            pose=pose,
            seed_entropy=tuple(int(v) for v in seed_entropy),
            splat_radius=splat_radius,
        )
        return label1, label2, spec
    raise FrustumError(
        f"{scene_id}: no pose inside both frusta after {max_retries} tries"
    )


def generate_dataset(
    models: dict[int, tuple[str, PointCloud]],
    n_per_class: int,
    cameras: dict[str, Camera],
    seed: int,
    out_dir: str | Path,
    pose_ranges: PoseRanges = PoseRanges(),
    splat_radius: int = DEFAULT_SPLAT_RADIUS,
) -> dict:
    """Write a dataset directory and return its manifest dictionary.

    Layout: ``manifest.json``, ``calibration.txt``, and per scene a
    directory with two label maps and the ground-truth pose. Scene rngs
    derive from (seed, class id, index), so regeneration with the same
    seed is byte-identical.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    out_dir = Path(out_dir)
    (out_dir / "scenes").mkdir(parents=True, exist_ok=True)
    write_calibration(out_dir / DATASET_CALIBRATION_NAME, cameras)

    scenes = []
    for class_id in sorted(models):
        name, cloud = models[class_id]
        for idx in range(n_per_class):
            entropy = (seed, class_id, idx)
            rng = np.random.default_rng(list(entropy))
            scene_id = f"{name}_{idx:03d}"
            try:
                label1, label2, spec = generate_scene(
                    cloud,
                    class_id,
                    cameras,
                    rng,
                    pose_ranges,
                    splat_radius,
                    scene_id=scene_id,
                    class_name=name,
                    seed_entropy=entropy,
                )
            except FrustumError as exc:
                raise FrustumError(f"scene {len(scenes)}: {exc}")
            scene_dir = out_dir / "scenes" / scene_id
            scene_dir.mkdir(parents=True, exist_ok=True)
            write_pgm(scene_dir / "cam1_labels.pgm", label1)
            write_pgm(scene_dir / "cam2_labels.pgm", label2)
            write_pose_matrix(scene_dir / "pose.txt", spec.pose)
            rel = f"scenes/{scene_id}"
            scenes.append(
                {
                    "id": scene_id,
                    "class_id": class_id,
                    "class_name": name,
                    "dir": rel,
                    "cam1_labels": f"{rel}/cam1_labels.pgm",
                    "cam2_labels": f"{rel}/cam2_labels.pgm",
                    "pose": f"{rel}/pose.txt",
                }
            )

    manifest = {
        "version": 1,
        "seed": seed,
        "splat_radius": splat_radius,
        "calibration": DATASET_CALIBRATION_NAME,
        "classes": [
            {"id": cid, "name": models[cid][0]} for cid in sorted(models)
        ],
        "scenes": scenes,
    }
    (out_dir / DATASET_MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest


def load_dataset_manifest(dataset_dir: str | Path) -> dict:
    path = Path(dataset_dir) / DATASET_MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(str(path))
    return json.loads(path.read_text())
