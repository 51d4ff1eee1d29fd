"""The pose estimator: depth from area, back-projection, signature
correlation, per-view scoring, and two-camera disambiguation.

For every library view a hypothesis is assembled: depth z from the
segment/model area ratio, (x, y) from back-projecting the segment
centroid, the in-plane angle theta3 from circular correlation of polar
signatures, a perspective-correction rotation, and the composed pose
P = T . Rc . Ri . Rs. The lowest-cost hypothesis wins; an optional
second camera re-renders the best hypotheses and replaces the cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConstantSignatureError, EmptyMaskError, ZeroAreaError
from .geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    PointCloud,
    apply_transform,
    compose_pose,
    correction_rotation,
    inplane_rotation,
    sphere_view_rotation,
)
from .masks import Segment, silhouette_descriptor
from .render import ShapeLibrary, ViewSample, render_silhouette

_ZERO_VARIANCE = 1e-12
_TIE_TOL = 1e-10


def estimate_depth(n_s: float, n_m: float, z_m: float) -> float:
    """Depth from the segment/model area ratio: z = z_m * sqrt(N_m / N_s)."""
    if n_s <= 0 or n_m <= 0:
        raise ZeroAreaError(f"areas must be positive, got N_s={n_s}, N_m={n_m}")
    if z_m <= 0:
        raise ValueError("z_m must be positive")
    return z_m * math.sqrt(n_m / n_s)


def backproject_center(p_image: np.ndarray, z: float, f: float) -> np.ndarray:
    """3D center from image coordinates relative to the principal point."""
    if z <= 0:
        raise ValueError("depth must be positive")
    if f <= 0:
        raise ValueError("focal length must be positive")
    p = np.asarray(p_image, dtype=float)
    return np.array([p[0] * z / f, p[1] * z / f, z])


def _center_and_norm(sig: np.ndarray) -> tuple[np.ndarray, float]:
    sig = np.asarray(sig, dtype=float)
    centered = sig - sig.mean()
    return centered, float(np.sqrt(np.sum(centered * centered)))


def _best_shift(correlations: np.ndarray) -> int:
    """Argmax with ties (within float tolerance) broken by smallest shift."""
    top = correlations.max()
    return int(np.flatnonzero(correlations >= top - _TIE_TOL)[0])


def match_inplane(
    sample: np.ndarray, model: np.ndarray
) -> tuple[float, float]:
    """Best circular alignment of two polar signatures.

    Returns (theta3 degrees, Pearson correlation at the best shift). The
    correlation is maximized over all circular shifts of the model; ties
    take the smallest shift. Raises :class:`ConstantSignatureError` when
    either signature has zero variance (disk-like silhouette).
    """
    sample = np.asarray(sample, dtype=float)
    model = np.asarray(model, dtype=float)
    if sample.shape != model.shape or sample.ndim != 1:
        raise ValueError("signatures must be 1D arrays of equal length")
    n = len(sample)
    s0, s_norm = _center_and_norm(sample)
    m0, m_norm = _center_and_norm(model)
    if s_norm < _ZERO_VARIANCE or m_norm < _ZERO_VARIANCE:
        raise ConstantSignatureError("signature has zero variance")
    cross = np.fft.irfft(np.fft.rfft(s0) * np.conj(np.fft.rfft(m0)), n=n)
    correlations = cross / (s_norm * m_norm)
    k = _best_shift(correlations)
    corr = float(np.clip(correlations[k], -1.0, 1.0))
    return k * 360.0 / n, corr


def _library_correlator(lib: ShapeLibrary):
    """Cached per-library FFT data for batch correlation."""
    if lib._match_cache is None:
        m0 = lib.signatures - lib.signatures.mean(axis=1, keepdims=True)
        norms = np.sqrt(np.sum(m0 * m0, axis=1))
        lib._match_cache = {
            "fft_conj": np.conj(np.fft.rfft(m0, axis=1)),
            "norms": norms,
        }
    return lib._match_cache


def _match_against_library(
    signature: np.ndarray, lib: ShapeLibrary
) -> tuple[np.ndarray, np.ndarray]:
    """theta3 (deg) and correlation per library view, vectorized.

    Views whose signature (or the sample) is constant fall back to the
    symmetric-object convention: correlation 1, theta3 0.
    """
    n = lib.signature_len
    s0, s_norm = _center_and_norm(signature)
    cache = _library_correlator(lib)
    thetas = np.zeros(lib.n_views)
    corrs = np.ones(lib.n_views)
    degenerate = (cache["norms"] < _ZERO_VARIANCE) | (s_norm < _ZERO_VARIANCE)
    live = ~degenerate
    if live.any():
        cross = np.fft.irfft(
            np.fft.rfft(s0)[None, :] * cache["fft_conj"][live], n=n, axis=1
        )
        correlations = cross / (s_norm * cache["norms"][live])[:, None]
        shifts = np.array([_best_shift(row) for row in correlations])
        corrs[live] = np.clip(
            correlations[np.arange(len(shifts)), shifts], -1.0, 1.0
        )
        thetas[live] = shifts * 360.0 / n
    return thetas, corrs


def _rot2(deg: float) -> np.ndarray:
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class PoseHypothesis:
    """Candidate 6D pose for one library view."""

    view_index: int
    view: ViewSample
    theta3: float
    translation: np.ndarray
    correction: np.ndarray
    pose: np.ndarray
    cost: float
    correlation: float

    @property
    def euler(self) -> tuple[float, float, float]:
        return (self.view.theta1, self.view.theta2, self.theta3)


def estimate_pose_single(
    segment: Segment,
    lib: ShapeLibrary,
    intr: CameraIntrinsics,
) -> list[PoseHypothesis]:
    """One scored hypothesis per library view, sorted by ascending cost.

    Cost is 1 - (max circular Pearson correlation). Equal costs preserve
    the library view order. Library and scene cameras may differ in focal
    length; areas are normalized by the squared focal ratio before the
    depth estimate, and the per-view silhouette-centroid offset is removed
    from the segment centroid so (x, y) locates the model origin rather
    than the silhouette's center of mass.
    """
    if segment.signature is None:
        raise ValueError("segment has no polar signature")
    if len(segment.signature) != lib.signature_len:
        raise ValueError("segment and library signature lengths differ")
    if segment.area <= 0:
        raise ZeroAreaError("segment area must be positive")

    f = intr.focal_length
    f_lib = lib.intrinsics.focal_length
    area_scale = (f / f_lib) ** 2
    p_rel = segment.centroid - np.asarray(intr.principal_point, dtype=float)

    thetas3, corrs = _match_against_library(segment.signature, lib)

    hypotheses = []
    for i in range(lib.n_views):
        theta3 = float(thetas3[i])
        z = estimate_depth(segment.area, lib.areas[i] * area_scale, lib.z_m)
        offset = _rot2(theta3) @ lib.centroid_offsets[i]
        offset *= (f / f_lib) * (lib.z_m / z)
        t = backproject_center(p_rel - offset, z, f)
        rc = correction_rotation(t)
        pose = compose_pose(
            t,
            rc,
            inplane_rotation(theta3),
            sphere_view_rotation(lib.thetas[i, 0], lib.thetas[i, 1]),
        )
        hypotheses.append(
            PoseHypothesis(
                view_index=i,
                view=lib.view(i),
                theta3=theta3,
                translation=t,
                correction=rc,
                pose=pose,
                cost=float(1.0 - corrs[i]),
                correlation=float(corrs[i]),
            )
        )
    hypotheses.sort(key=lambda h: h.cost)
    return hypotheses


def second_view_cost(
    hypothesis: PoseHypothesis,
    cloud: PointCloud,
    e1: CameraExtrinsics,
    e2: CameraExtrinsics,
    intr2: CameraIntrinsics,
    segment2: Segment,
    splat_radius: int,
) -> float:
    """Cost of a hypothesis as seen by the second camera.

    Transforms the model by the hypothesis pose, maps it into camera 2,
    renders the silhouette, and scores 1 - (max circular correlation)
    against the second segment's signature. Hypotheses falling outside
    camera 2's frustum get +inf.
    """
    if segment2.signature is None:
        raise ValueError("second segment has no polar signature")
    to_cam2 = e2.world_to_camera @ e1.inverse() @ hypothesis.pose
    pts = apply_transform(to_cam2, cloud.points)
    try:
        mask = render_silhouette(pts, np.eye(4), intr2, splat_radius)
        _, _, sig = silhouette_descriptor(mask, len(segment2.signature))
    except EmptyMaskError:
        return math.inf
    try:
        _, corr = match_inplane(segment2.signature, sig)
    except ConstantSignatureError:
        corr = 1.0
    return 1.0 - corr


def refine_with_second_view(
    hypotheses: list[PoseHypothesis],
    cloud: PointCloud,
    e1: CameraExtrinsics,
    e2: CameraExtrinsics,
    intr2: CameraIntrinsics,
    segment2: Segment,
    top_k: int = 20,
    splat_radius: int = 2,
) -> PoseHypothesis:
    """Re-score the ``top_k`` lowest-cost hypotheses in the second camera.

    Returns the hypothesis minimizing the second-camera cost, with its
    cost replaced by that value. Ties keep the single-view order.
    """
    if not hypotheses:
        raise ValueError("no hypotheses to refine")
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    best = None
    best_cost = math.inf
    for hyp in hypotheses[:top_k]:
        cost = second_view_cost(
            hyp, cloud, e1, e2, intr2, segment2, splat_radius
        )
        if best is None or cost < best_cost:
            best, best_cost = hyp, cost
    return replace(best, cost=best_cost, correlation=1.0 - best_cost)
