"""File formats: point clouds, masks, calibration, and pose files.

All text formats write floats with ``repr`` so that reading the file
back reproduces every value bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from .errors import CalibrationError
from .geometry import Camera, CameraExtrinsics, CameraIntrinsics, PointCloud

_CALIBRATION_HEADER = "shapepose_calibration 1"
_POSE_HEADER = "shapepose_pose 1"


# ---------------------------------------------------------------- point clouds


def load_xyz(path: str | Path) -> PointCloud:
    """ASCII XYZ: one "x y z" triple per line; rejects non-finite values."""
    pts = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ValueError(f"{path}:{ln}: expected 3 coordinates")
            pts.append([float(v) for v in parts[:3]])
    if not pts:
        raise ValueError(f"{path}: no points")
    arr = np.array(pts)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{path}: non-finite coordinates")
    return PointCloud(arr)


def save_xyz(path: str | Path, cloud: PointCloud) -> None:
    with open(path, "w") as fh:
        for x, y, z in cloud.points:
            fh.write(f"{x!r} {y!r} {z!r}\n")


def load_ply(path: str | Path) -> PointCloud:
    """Minimal ASCII PLY reader: vertex positions only."""
    with open(path, "rb") as fh:
        header = []
        while True:
            line = fh.readline().decode("ascii", "replace").strip()
            header.append(line)
            if line == "end_header":
                break
            if not line and fh.tell() > 1 << 20:
                raise ValueError(f"{path}: header never ends")
        body = fh.read().decode("ascii", "replace")
    if not header or header[0] != "ply":
        raise ValueError(f"{path}: not a PLY file")
    fmt = next((h for h in header if h.startswith("format ")), "")
    if "ascii" not in fmt:
        raise ValueError(f"{path}: only ASCII PLY is supported")
    n_vertex = None
    props: list[str] = []
    in_vertex = False
    for line in header:
        if line.startswith("element "):
            in_vertex = line.split()[1] == "vertex"
            if in_vertex:
                n_vertex = int(line.split()[2])
        elif line.startswith("property ") and in_vertex:
            props.append(line.split()[-1])
    if n_vertex is None:
        raise ValueError(f"{path}: no vertex element")
    try:
        ix, iy, iz = props.index("x"), props.index("y"), props.index("z")
    except ValueError:
        raise ValueError(f"{path}: vertex element lacks x/y/z properties")
    rows = body.splitlines()
    if len(rows) < n_vertex:
        raise ValueError(f"{path}: fewer vertex rows than declared")
    pts = np.empty((n_vertex, 3))
    for i in range(n_vertex):
        parts = rows[i].split()
        pts[i] = (float(parts[ix]), float(parts[iy]), float(parts[iz]))
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{path}: non-finite coordinates")
    return PointCloud(pts)


def load_point_cloud(path: str | Path) -> PointCloud:
    """Dispatch on extension: .ply or ASCII XYZ (anything else)."""
    if Path(path).suffix.lower() == ".ply":
        return load_ply(path)
    return load_xyz(path)


# ----------------------------------------------------------------------- masks


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    """Binary (P5) 8-bit PGM."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] not in (b"P5", b"P2"):
        raise ValueError(f"{path}: not a PGM file")
    # header tokens: magic, width, height, maxval (comments start with #)
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    w, h, maxval = (int(t) for t in tokens)
    if maxval > 255:
        raise ValueError(f"{path}: only 8-bit PGM supported")
    if data[:2] == b"P5":
        pos += 1  # single whitespace after maxval
        pixels = np.frombuffer(data, np.uint8, count=w * h, offset=pos)
    else:
        pixels = np.array(data[pos:].split()[: w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape(h, w).copy()


def write_mask(path: str | Path, mask: np.ndarray) -> None:
    """8-bit grayscale image; PGM baseline, PNG by extension."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        cv2.imwrite(str(path), np.ascontiguousarray(mask, dtype=np.uint8))
    else:
        write_pgm(path, mask)


def read_label_map(path: str | Path) -> np.ndarray:
    """8-bit grayscale image whose pixel values are class ids."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    if path.suffix.lower() in (".pgm",):
        return read_pgm(path)
    img = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if img is None:
        raise ValueError(f"{path}: unreadable image")
    return img


# ----------------------------------------------------------------- calibration


def write_calibration(path: str | Path, cameras: dict[str, Camera]) -> None:
    """Text calibration file; full-precision round trip via repr floats."""
    lines = [_CALIBRATION_HEADER]
    for name, cam in cameras.items():
        intr, extr = cam.intrinsics, cam.extrinsics
        cx, cy = intr.principal_point
        w, h = intr.resolution
        flat = " ".join(repr(v) for v in extr.world_to_camera.ravel())
        lines += [
            f"camera {name}",
            f"focal_length {intr.focal_length!r}",
            f"principal_point {cx!r} {cy!r}",
            f"resolution {int(w)} {int(h)}",
            f"world_to_camera {flat}",
        ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_calibration(path: str | Path) -> dict[str, Camera]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    lines = [
        ln.strip() for ln in path.read_text().splitlines() if ln.strip()
    ]
    if not lines or lines[0] != _CALIBRATION_HEADER:
        raise CalibrationError(f"{path}: missing calibration header")
    cameras: dict[str, Camera] = {}
    name = None
    fields: dict[str, list[str]] = {}

    def finish():
        if name is None:
            return
        try:
            focal = float(fields["focal_length"][0])
            cx, cy = (float(v) for v in fields["principal_point"])
            w, h = (int(v) for v in fields["resolution"])
            m = np.array(
                [float(v) for v in fields["world_to_camera"]]
            ).reshape(4, 4)
        except (KeyError, ValueError, IndexError) as exc:
            raise CalibrationError(f"{path}: camera {name}: {exc}")
        cameras[name] = Camera(
            CameraIntrinsics(focal, (cx, cy), (w, h)),
            CameraExtrinsics(m),
        )

    for line in lines[1:]:
        key, *rest = line.split()
        if key == "camera":
            finish()
            name = rest[0]
            fields = {}
        elif name is None:
            raise CalibrationError(f"{path}: field before any camera: {line}")
        else:
            fields[key] = rest
    finish()
    if not cameras:
        raise CalibrationError(f"{path}: no cameras")
    return cameras


# ------------------------------------------------------------------ pose files


def write_pose_matrix(path: str | Path, pose: np.ndarray) -> None:
    """4x4 row-major text matrix, one row per line."""
    pose = np.asarray(pose, dtype=float)
    with open(path, "w") as fh:
        for row in pose:
            fh.write(" ".join(repr(v) for v in row) + "\n")


def read_pose_matrix(path: str | Path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                rows.append([float(v) for v in line.split()])
    m = np.array(rows)
    if m.shape != (4, 4):
        raise ValueError(f"{path}: expected a 4x4 matrix, got {m.shape}")
    return m


def write_pose_result(
    path: str | Path,
    class_id: int,
    class_name: str,
    cost: float,
    translation: np.ndarray,
    euler: tuple[float, float, float],
    pose: np.ndarray,
    cloud_path: str | None = None,
) -> None:
    """Pose estimate file: class, cost, 6D parameters, and the 4x4 matrix."""
    x, y, z = (float(v) for v in translation)
    t1, t2, t3 = euler
    lines = [
        _POSE_HEADER,
        f"class_id {class_id}",
        f"class_name {class_name}",
        f"cost {cost!r}",
        f"x {x!r}",
        f"y {y!r}",
        f"z {z!r}",
        f"theta1 {t1!r}",
        f"theta2 {t2!r}",
        f"theta3 {t3!r}",
        "pose " + " ".join(repr(v) for v in np.asarray(pose).ravel()),
    ]
    if cloud_path is not None:
        lines.append(f"cloud {cloud_path}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_pose_result(path: str | Path) -> dict:
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or lines[0] != _POSE_HEADER:
        raise ValueError(f"{path}: missing pose header")
    out: dict = {}
    for line in lines[1:]:
        key, *rest = line.split()
        if key == "pose":
            out["pose"] = np.array([float(v) for v in rest]).reshape(4, 4)
        elif key in ("class_id",):
            out[key] = int(rest[0])
        elif key in ("class_name", "cloud"):
            out[key] = rest[0]
        else:
            out[key] = float(rest[0])
    return out
