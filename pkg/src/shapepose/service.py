"""FastAPI service exposing the pose-estimation pipeline.

The service is designed to run next to its data: requests reference
files by path (model files, label maps, manifests, output directories),
and heavyweight assets such as shape libraries are cached between
requests. The CLI is a thin client of this app, either in-process or
over HTTP.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import ShapePoseError
from .geometry import CameraIntrinsics
from .io import load_point_cloud
from .render import (
    DEFAULT_LIBRARY_RESOLUTION,
    DEFAULT_SPLAT_RADIUS,
    build_shape_library,
    fit_focal_length,
)
from .masks import DEFAULT_SIGNATURE_LEN
from .synth import PoseRanges
from .workspace import (
    DEFAULT_N_VIEWS,
    DEFAULT_Z_M,
    estimate_from_files,
    evaluate_dataset,
    init_workspace,
    load_manifest,
    synthesize_dataset,
    write_estimate,
)


class HealthResponse(BaseModel):
    status: str
    version: str


class InitRequest(BaseModel):
    out_dir: str
    n_views: int = Field(DEFAULT_N_VIEWS, ge=1)
    z_m: float = Field(DEFAULT_Z_M, gt=0)
    seed: int = 0
    points_per_model: int = Field(12000, ge=100)
    build_libraries: bool = True
    threads: int = Field(1, ge=1)


class InitResponse(BaseModel):
    manifest_path: str
    classes: list[str]


class BuildLibraryRequest(BaseModel):
    model_path: str
    class_id: int = Field(ge=0)
    n_views: int = Field(DEFAULT_N_VIEWS, ge=1)
    z_m: float = Field(DEFAULT_Z_M, gt=0)
    out_path: str
    splat_radius: int = Field(DEFAULT_SPLAT_RADIUS, ge=0)
    signature_len: int = Field(DEFAULT_SIGNATURE_LEN, ge=8)
    resolution: tuple[int, int] = DEFAULT_LIBRARY_RESOLUTION
    focal_length: float | None = Field(None, gt=0)
    threads: int = Field(1, ge=1)


class BuildLibraryResponse(BaseModel):
    out_path: str
    n_views: int
    z_m: float
    focal_length: float
    area_min: int
    area_mean: float
    area_max: int
    areas: list[int]


class EstimateRequest(BaseModel):
    manifest_path: str
    mask1_path: str
    mask2_path: str | None = None
    out_path: str | None = None
    top_k: int | None = Field(None, ge=1)
    emit_cloud: bool = False


class EstimateResponse(BaseModel):
    class_id: int
    class_name: str
    cost: float
    single_view_cost: float
    used_second_view: bool
    x: float
    y: float
    z: float
    theta1: float
    theta2: float
    theta3: float
    pose: list[float]
    view_index: int
    out_path: str | None = None
    cloud_path: str | None = None
    all_costs: list[float] | None = None


class SynthRequest(BaseModel):
    manifest_path: str
    n_per_class: int = Field(ge=1)
    seed: int = 0
    out_dir: str


class SynthResponse(BaseModel):
    out_dir: str
    n_scenes: int
    scene_ids: list[str]


class EvaluateRequest(BaseModel):
    manifest_path: str
    dataset_dir: str
    results_dir: str
    thresholds: list[float] = [0.10, 0.15, 0.20]
    estimate_missing: bool = True
    top_k: int | None = Field(None, ge=1)


class ClassSummaryModel(BaseModel):
    class_id: int
    class_name: str
    count: int
    mean_adds: float
    stderr: float
    success_rates: dict[str, float]


class EvaluateResponse(BaseModel):
    results_path: str
    n_records: int
    missing: list[str]
    classes: list[ClassSummaryModel]


def create_app() -> FastAPI:
    app = FastAPI(title="shapepose", version=__version__)

    @app.exception_handler(ShapePoseError)
    async def domain_error(request: Request, exc: ShapePoseError):
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=404,
            content={"error": "FileNotFoundError", "detail": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/workspaces/init", response_model=InitResponse)
    def workspaces_init(req: InitRequest):
        manifest_path = init_workspace(
            req.out_dir,
            n_views=req.n_views,
            z_m=req.z_m,
            seed=req.seed,
            points_per_model=req.points_per_model,
            build_libraries=req.build_libraries,
            max_workers=req.threads,
        )
        manifest = load_manifest(manifest_path)
        return InitResponse(
            manifest_path=str(manifest_path),
            classes=[e.name for e in manifest.classes.values()],
        )

    @app.post("/shape-libraries/build", response_model=BuildLibraryResponse)
    def shape_libraries_build(req: BuildLibraryRequest):
        model_path = Path(req.model_path)
        if not model_path.exists():
            raise FileNotFoundError(str(model_path))
        cloud = load_point_cloud(model_path)
        focal = req.focal_length or fit_focal_length(
            cloud.diameter, req.z_m, tuple(req.resolution)
        )
        intr = CameraIntrinsics(
            focal,
            ((req.resolution[0] - 1) / 2.0, (req.resolution[1] - 1) / 2.0),
            tuple(req.resolution),
        )
        lib = build_shape_library(
            cloud,
            req.class_id,
            req.n_views,
            req.z_m,
            intr,
            splat_radius=req.splat_radius,
            signature_len=req.signature_len,
            max_workers=req.threads,
        )
        Path(req.out_path).parent.mkdir(parents=True, exist_ok=True)
        lib.save(req.out_path)
        areas = [int(a) for a in lib.areas]
        return BuildLibraryResponse(
            out_path=req.out_path,
            n_views=lib.n_views,
            z_m=lib.z_m,
            focal_length=focal,
            area_min=min(areas),
            area_mean=float(np.mean(areas)),
            area_max=max(areas),
            areas=areas,
        )

    @app.post("/estimate", response_model=EstimateResponse)
    def estimate(req: EstimateRequest):
        manifest = load_manifest(req.manifest_path)
        for p in (req.mask1_path, req.mask2_path):
            if p is not None and not Path(p).exists():
                raise FileNotFoundError(p)
        outcome = estimate_from_files(
            manifest, req.mask1_path, req.mask2_path, top_k=req.top_k
        )
        cloud_name = None
        if req.out_path:
            cloud_name = write_estimate(
                req.out_path, manifest, outcome, emit_cloud=req.emit_cloud
            )
        hyp = outcome.hypothesis
        return EstimateResponse(
            class_id=outcome.class_id,
            class_name=outcome.class_name,
            cost=hyp.cost,
            single_view_cost=outcome.single_view_cost,
            used_second_view=outcome.used_second_view,
            x=float(hyp.translation[0]),
            y=float(hyp.translation[1]),
            z=float(hyp.translation[2]),
            theta1=hyp.view.theta1,
            theta2=hyp.view.theta2,
            theta3=hyp.theta3,
            pose=[float(v) for v in hyp.pose.ravel()],
            view_index=hyp.view_index,
            out_path=req.out_path,
            cloud_path=cloud_name,
            all_costs=outcome.all_costs,
        )

    @app.post("/datasets/generate", response_model=SynthResponse)
    def datasets_generate(req: SynthRequest):
        manifest = load_manifest(req.manifest_path)
        data = synthesize_dataset(
            manifest, req.n_per_class, req.seed, req.out_dir, PoseRanges()
        )
        return SynthResponse(
            out_dir=req.out_dir,
            n_scenes=len(data["scenes"]),
            scene_ids=[s["id"] for s in data["scenes"]],
        )

    @app.post("/evaluations/run", response_model=EvaluateResponse)
    def evaluations_run(req: EvaluateRequest):
        manifest = load_manifest(req.manifest_path)
        outcome = evaluate_dataset(
            manifest,
            req.dataset_dir,
            req.results_dir,
            thresholds=tuple(req.thresholds),
            estimate_missing=req.estimate_missing,
            top_k=req.top_k,
        )
        return EvaluateResponse(
            results_path=str(outcome.results_path),
            n_records=len(outcome.records),
            missing=outcome.missing,
            classes=[
                ClassSummaryModel(
                    class_id=s.class_id,
                    class_name=s.class_name,
                    count=s.count,
                    mean_adds=s.mean_adds,
                    stderr=s.stderr,
                    success_rates={repr(t): r for t, r in s.success_rates.items()},
                )
                for s in outcome.summaries
            ],
        )

    return app
