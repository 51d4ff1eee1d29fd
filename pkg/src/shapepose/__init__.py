"""6D pose estimation and 3D reconstruction from 2D silhouettes.

Matches segment silhouettes against a precomputed view-sphere library of
model silhouettes: depth from the area ratio, in-plane rotation from
circular correlation of polar contour signatures, a perspective
correction rotation, and optional two-camera disambiguation. Includes a
closed-loop synthetic benchmark harness with ADD-S scoring.
"""

__version__ = "0.1.0"

from .errors import (
    BehindCameraError,
    CalibrationError,
    ConstantSignatureError,
    DegenerateContourError,
    EmptyMaskError,
    FrustumError,
    LibraryFormatError,
    ManifestError,
    NoSegmentError,
    ShapePoseError,
    ZeroAreaError,
)
from .evaluation import EvalRecord, adds_error, benchmark, success
from .geometry import (
    Camera,
    CameraExtrinsics,
    CameraIntrinsics,
    EulerView,
    PointCloud,
    apply_transform,
    change_camera,
    compose_pose,
    correction_rotation,
    inplane_rotation,
    look_at,
    rigid,
    sphere_view_rotation,
    transform_cloud,
)
from .masks import (
    Segment,
    connected_components,
    extract_segments,
    polar_signature,
    trace_contour,
    vote_class,
)
from .matching import (
    PoseHypothesis,
    backproject_center,
    estimate_depth,
    estimate_pose_single,
    match_inplane,
    refine_with_second_view,
)
from .render import (
    ShapeLibrary,
    ViewSample,
    build_shape_library,
    project_point,
    render_silhouette,
    sample_viewsphere,
)
from .synth import PoseRanges, SceneSpec, default_rig, generate_dataset, generate_scene

__all__ = [
    "__version__",
    "BehindCameraError",
    "CalibrationError",
    "Camera",
    "CameraExtrinsics",
    "CameraIntrinsics",
    "ConstantSignatureError",
    "DegenerateContourError",
    "EmptyMaskError",
    "EulerView",
    "EvalRecord",
    "FrustumError",
    "LibraryFormatError",
    "ManifestError",
    "NoSegmentError",
    "PointCloud",
    "PoseHypothesis",
    "PoseRanges",
    "SceneSpec",
    "Segment",
    "ShapeLibrary",
    "ShapePoseError",
    "ViewSample",
    "ZeroAreaError",
    "adds_error",
    "apply_transform",
    "backproject_center",
    "benchmark",
    "build_shape_library",
    "change_camera",
    "compose_pose",
    "connected_components",
    "correction_rotation",
    "default_rig",
    "estimate_depth",
    "estimate_pose_single",
    "extract_segments",
    "generate_dataset",
    "generate_scene",
    "inplane_rotation",
    "look_at",
    "match_inplane",
    "polar_signature",
    "project_point",
    "refine_with_second_view",
    "render_silhouette",
    "rigid",
    "sample_viewsphere",
    "sphere_view_rotation",
    "success",
    "trace_contour",
    "transform_cloud",
    "vote_class",
]
