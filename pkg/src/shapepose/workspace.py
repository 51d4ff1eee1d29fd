"""Workspace manifest and end-to-end orchestration.

A workspace is a directory with a manifest (class table, calibration
reference, matching defaults), model files, and shape libraries. The
functions here wire the pipeline stages together for the service and
CLI: estimation from label-map files, dataset synthesis, and benchmark
evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import io as spio
from .errors import ManifestError, NoSegmentError
from .evaluation import (
    DEFAULT_THRESHOLDS,
    ClassSummary,
    EvalRecord,
    adds_error,
    benchmark,
    write_results_file,
)
from .geometry import Camera, PointCloud, transform_cloud
from .masks import DEFAULT_MIN_AREA, DEFAULT_SIGNATURE_LEN, extract_segments
from .matching import PoseHypothesis, estimate_pose_single, refine_with_second_view
from .models import CLASS_NAMES, DEFAULT_POINTS, make_model
from .render import (
    DEFAULT_LIBRARY_RESOLUTION,
    DEFAULT_SPLAT_RADIUS,
    ShapeLibrary,
    build_shape_library,
    fit_focal_length,
)
from .synth import PoseRanges, default_rig, generate_dataset, load_dataset_manifest
from .geometry import CameraIntrinsics

MANIFEST_NAME = "manifest.json"
DEFAULT_TOP_K = 20
DEFAULT_Z_M = 8.0
DEFAULT_N_VIEWS = 200


@dataclass(frozen=True)
class ClassEntry:
    class_id: int
    name: str
    model_path: Path
    library_path: Path


@dataclass(frozen=True)
class Manifest:
    """Workspace description: classes, calibration, matching defaults."""

    root: Path
    signature_len: int
    calibration_path: Path
    splat_radius: int
    min_area: int
    top_k: int
    classes: dict[int, ClassEntry]


def load_manifest(path: str | Path) -> Manifest:
    """Load and validate a workspace manifest.

    Relative paths resolve against the manifest's directory; every
    referenced path must exist and class ids must be unique.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    data = json.loads(path.read_text())
    root = path.parent
    defaults = data.get("defaults", {})
    classes: dict[int, ClassEntry] = {}
    for entry in data.get("classes", []):
        cid = int(entry["id"])
        if cid in classes:
            raise ManifestError(f"{path}: duplicate class id {cid}")
        classes[cid] = ClassEntry(
            class_id=cid,
            name=entry["name"],
            model_path=root / entry["model"],
            library_path=root / entry["shape_library"],
        )
    manifest = Manifest(
        root=root,
        signature_len=int(data.get("signature_len", DEFAULT_SIGNATURE_LEN)),
        calibration_path=root / data.get("calibration", "calibration.txt"),
        splat_radius=int(defaults.get("splat_radius", DEFAULT_SPLAT_RADIUS)),
        min_area=int(defaults.get("min_area", DEFAULT_MIN_AREA)),
        top_k=int(defaults.get("top_k", DEFAULT_TOP_K)),
        classes=classes,
    )
    missing = [
        str(p)
        for entry in classes.values()
        for p in (entry.model_path, entry.library_path)
        if not p.exists()
    ]
    if not manifest.calibration_path.exists():
        missing.append(str(manifest.calibration_path))
    if missing:
        raise ManifestError(f"{path}: missing referenced files: {missing}")
    return manifest


_library_cache: dict = {}
_cloud_cache: dict = {}


def _file_key(path: Path):
    st = path.stat()
    return (str(path.resolve()), st.st_size, st.st_mtime_ns)


def get_library(manifest: Manifest, class_id: int) -> ShapeLibrary:
    entry = manifest.classes.get(class_id)
    if entry is None:
        raise ManifestError(f"class {class_id} has no shape library in manifest")
    key = _file_key(entry.library_path)
    if key not in _library_cache:
        _library_cache[key] = ShapeLibrary.load(entry.library_path)
    return _library_cache[key]


def get_model(manifest: Manifest, class_id: int) -> PointCloud:
    entry = manifest.classes.get(class_id)
    if entry is None:
        raise ManifestError(f"class {class_id} has no model in manifest")
    key = _file_key(entry.model_path)
    if key not in _cloud_cache:
        _cloud_cache[key] = spio.load_point_cloud(entry.model_path)
    return _cloud_cache[key]


def load_cameras(manifest: Manifest) -> list[Camera]:
    """Cameras from the calibration file, in file order (cam1 first)."""
    return list(spio.read_calibration(manifest.calibration_path).values())


@dataclass(frozen=True)
class EstimateOutcome:
    """Result of one end-to-end estimation run."""

    class_id: int
    class_name: str
    hypothesis: PoseHypothesis
    single_view_cost: float
    used_second_view: bool
    all_costs: list[float]


def estimate_from_files(
    manifest: Manifest,
    mask1_path: str | Path,
    mask2_path: str | Path | None = None,
    top_k: int | None = None,
) -> EstimateOutcome:
    """Full pipeline on one (or two) label-map files.

    Estimates the pose of the largest segment of the first map; a second
    map triggers two-camera refinement. Single-object scenes are assumed;
    smaller extra segments are ignored.
    """
    label1 = spio.read_label_map(mask1_path)
    segments = extract_segments(label1, manifest.min_area, manifest.signature_len)
    if not segments:
        raise NoSegmentError(f"{mask1_path}: no segment found")
    segment = segments[0]
    class_id = segment.class_id
    entry = manifest.classes.get(class_id)
    if entry is None:
        raise ManifestError(f"segment votes class {class_id}, not in manifest")
    library = get_library(manifest, class_id)
    cameras = load_cameras(manifest)
    hypotheses = estimate_pose_single(segment, library, cameras[0].intrinsics)
    best = hypotheses[0]
    used_second = False
    if mask2_path is not None:
        if len(cameras) < 2:
            raise ManifestError("second mask given but calibration has one camera")
        label2 = spio.read_label_map(mask2_path)
        segments2 = extract_segments(
            label2, manifest.min_area, manifest.signature_len
        )
        same_class = [s for s in segments2 if s.class_id == class_id]
        if not same_class:
            raise NoSegmentError(f"{mask2_path}: no segment of class {class_id}")
        best = refine_with_second_view(
            hypotheses,
            get_model(manifest, class_id),
            cameras[0].extrinsics,
            cameras[1].extrinsics,
            cameras[1].intrinsics,
            same_class[0],
            top_k=top_k or manifest.top_k,
            splat_radius=manifest.splat_radius,
        )
        used_second = True
    return EstimateOutcome(
        class_id=class_id,
        class_name=entry.name,
        hypothesis=best,
        single_view_cost=hypotheses[0].cost,
        used_second_view=used_second,
        all_costs=[h.cost for h in hypotheses],
    )


def write_estimate(
    out_path: str | Path,
    manifest: Manifest,
    outcome: EstimateOutcome,
    emit_cloud: bool = False,
) -> str | None:
    """Write the pose result file, optionally with the reconstructed cloud."""
    hyp = outcome.hypothesis
    cloud_name = None
    if emit_cloud:
        cloud_path = Path(out_path).with_suffix(".cloud.xyz")
        reconstructed = transform_cloud(
            hyp.pose, get_model(manifest, outcome.class_id)
        )
        spio.save_xyz(cloud_path, reconstructed)
        cloud_name = cloud_path.name
    spio.write_pose_result(
        out_path,
        class_id=outcome.class_id,
        class_name=outcome.class_name,
        cost=hyp.cost,
        translation=hyp.translation,
        euler=hyp.euler,
        pose=hyp.pose,
        cloud_path=cloud_name,
    )
    return cloud_name


@dataclass(frozen=True)
class EvaluationOutcome:
    records: list[EvalRecord]
    summaries: list[ClassSummary]
    missing: list[str]
    results_path: Path


def evaluate_dataset(
    manifest: Manifest,
    dataset_dir: str | Path,
    results_dir: str | Path,
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
    estimate_missing: bool = False,
    top_k: int | None = None,
) -> EvaluationOutcome:
    """Score per-scene estimates against the dataset's ground truth.

    Expects ``<results_dir>/<scene_id>.pose.txt`` per scene; with
    ``estimate_missing`` the pipeline runs (two-view) estimation for any
    scene lacking one. Missing scenes are reported and skipped otherwise.
    """
    dataset_dir = Path(dataset_dir)
    results_dir = Path(results_dir)
    results_dir.mkdir(parents=True, exist_ok=True)
    data = load_dataset_manifest(dataset_dir)
    records: list[EvalRecord] = []
    missing: list[str] = []
    for scene in data["scenes"]:
        sid = scene["id"]
        est_path = results_dir / f"{sid}.pose.txt"
        if not est_path.exists():
            if estimate_missing:
                outcome = estimate_from_files(
                    manifest,
                    dataset_dir / scene["cam1_labels"],
                    dataset_dir / scene["cam2_labels"],
                    top_k=top_k,
                )
                write_estimate(est_path, manifest, outcome)
            else:
                missing.append(sid)
                continue
        est = spio.read_pose_result(est_path)
        pose_gt = spio.read_pose_matrix(dataset_dir / scene["pose"])
        cloud = get_model(manifest, int(scene["class_id"]))
        adds = adds_error(est["pose"], pose_gt, cloud)
        records.append(
            EvalRecord(
                scene_id=sid,
                class_id=int(scene["class_id"]),
                pose=est["pose"],
                pose_gt=pose_gt,
                adds=adds,
                diameter=cloud.diameter,
            )
        )
    if not records:
        raise ManifestError(f"{dataset_dir}: no scenes could be evaluated")
    names = {c["id"]: c["name"] for c in data.get("classes", [])}
    summaries = benchmark(records, thresholds, names)
    results_path = results_dir / "results.txt"
    write_results_file(results_path, records, summaries, thresholds, names)
    return EvaluationOutcome(records, summaries, missing, results_path)


def synthesize_dataset(
    manifest: Manifest,
    n_per_class: int,
    seed: int,
    out_dir: str | Path,
    pose_ranges: PoseRanges = PoseRanges(),
) -> dict:
    """Generate a benchmark dataset from the manifest's models and cameras."""
    cameras = spio.read_calibration(manifest.calibration_path)
    models = {
        cid: (entry.name, get_model(manifest, cid))
        for cid, entry in sorted(manifest.classes.items())
    }
    return generate_dataset(
        models,
        n_per_class,
        cameras,
        seed,
        out_dir,
        pose_ranges=pose_ranges,
        splat_radius=manifest.splat_radius,
    )


def init_workspace(
    out_dir: str | Path,
    n_views: int = DEFAULT_N_VIEWS,
    z_m: float = DEFAULT_Z_M,
    seed: int = 0,
    points_per_model: int = DEFAULT_POINTS,
    signature_len: int = DEFAULT_SIGNATURE_LEN,
    splat_radius: int = DEFAULT_SPLAT_RADIUS,
    library_resolution: tuple[int, int] = DEFAULT_LIBRARY_RESOLUTION,
    build_libraries: bool = True,
    max_workers: int = 1,
) -> Path:
    """Create a ready-to-run demo workspace with the procedural models.

    Writes models, calibration for the default rig, one shape library
    per class (framed at ~60% of the library image), and the manifest.
    Returns the manifest path.
    """
    out_dir = Path(out_dir)
    (out_dir / "models").mkdir(parents=True, exist_ok=True)
    (out_dir / "libs").mkdir(parents=True, exist_ok=True)
    write_calibration(out_dir / "calibration.txt", default_rig())

    classes = []
    for cid in sorted(CLASS_NAMES):
        name = CLASS_NAMES[cid]
        cloud = make_model(name, n_points=points_per_model, seed=seed)
        model_rel = f"models/{name}.xyz"
        lib_rel = f"libs/{name}.shl"
        spio.save_xyz(out_dir / model_rel, cloud)
        if build_libraries:
            intr = CameraIntrinsics(
                fit_focal_length(cloud.diameter, z_m, library_resolution),
                (
                    (library_resolution[0] - 1) / 2.0,
                    (library_resolution[1] - 1) / 2.0,
                ),
                library_resolution,
            )
            lib = build_shape_library(
                cloud,
                cid,
                n_views,
                z_m,
                intr,
                splat_radius=splat_radius,
                signature_len=signature_len,
                max_workers=max_workers,
            )
            lib.save(out_dir / lib_rel)
        classes.append(
            {"id": cid, "name": name, "model": model_rel, "shape_library": lib_rel}
        )

    manifest = {
        "version": 1,
        "signature_len": signature_len,
        "calibration": "calibration.txt",
        "defaults": {
            "splat_radius": splat_radius,
            "min_area": DEFAULT_MIN_AREA,
            "top_k": DEFAULT_TOP_K,
        },
        "classes": classes,
    }
    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path
