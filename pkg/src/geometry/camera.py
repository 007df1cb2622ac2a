import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from src.errors import MaskSizeMismatch

logger = logging.getLogger(__name__)

Frame = Literal["camera", "global"]

# depth below which a projection is flagged invalid
MIN_DEPTH = 1e-6
ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole camera model, pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image {self.width}x{self.height}"
            )

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]],
            dtype=np.float64,
        )

    def scaled(self, s: float) -> "Intrinsics":
        return Intrinsics(
            fx=self.fx * s,
            fy=self.fy * s,
            cx=self.cx * s,
            cy=self.cy * s,
            width=int(round(self.width * s)),
            height=int(round(self.height * s)),
        )

    def as_tuple(self) -> tuple:
        return (self.fx, self.fy, self.cx, self.cy, float(self.width), float(self.height))


@dataclass(frozen=True)
class PoseSE3:
    """Rigid transform p' = R·p + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if np.abs(R.T @ R - np.eye(3)).max() > ORTHO_TOL:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
            raise ValueError("rotation determinant is not +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "PoseSE3":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_flat(cls, values) -> "PoseSE3":
        v = np.asarray(values, dtype=np.float64).reshape(12)
        return cls(v[:9].reshape(3, 3), v[9:])

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.rotation.reshape(9), self.translation])

    def inverse(self) -> "PoseSE3":
        Rt = self.rotation.T
        return PoseSE3(Rt, -Rt @ self.translation)

    def compose(self, other: "PoseSE3") -> "PoseSE3":
        """self ∘ other: apply `other` first."""
        return PoseSE3(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    frame: Frame = "camera"

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim != 2 or pts.shape[1] != 3:
            pts = pts.reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class ProjectedPoints:
    uv: np.ndarray
    depth: np.ndarray
    valid: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.depth.shape[0])

    def pairs(self) -> list:
        out = []
        for (u, v), z, ok in zip(self.uv, self.depth, self.valid):
            out.append(((float(u), float(v)), float(z)) if ok else None)
        return out


def transform_points(pose: PoseSE3, pc: PointCloud, frame: Frame | None = None) -> PointCloud:
    if frame is None:
        frame = "global" if pc.frame == "camera" else "camera"
    return PointCloud(pose.apply(pc.points), frame=frame)


def project_points(K: Intrinsics, pc: PointCloud) -> ProjectedPoints:
    pts = np.asarray(pc.points, dtype=np.float64)
    z = pts[:, 2]
    valid = z > MIN_DEPTH
    safe_z = np.where(valid, z, 1.0)
    u = K.fx * pts[:, 0] / safe_z + K.cx
    v = K.fy * pts[:, 1] / safe_z + K.cy
    uv = np.stack([u, v], axis=1)
    uv[~valid] = np.nan
    return ProjectedPoints(uv=uv, depth=z.copy(), valid=valid)


def unproject_points(K: Intrinsics, uv: np.ndarray, depth: np.ndarray) -> PointCloud:
    uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    z = np.asarray(depth, dtype=np.float64).reshape(-1)
    x = (uv[:, 0] - K.cx) / K.fx * z
    y = (uv[:, 1] - K.cy) / K.fy * z
    return PointCloud(np.stack([x, y, z], axis=1), frame="camera")


def pixel_indices(K: Intrinsics, proj: ProjectedPoints) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (row, col, in_bounds) for every projected point."""
    uv = np.where(proj.valid[:, None], proj.uv, -1.0)
    col = np.floor(uv[:, 0]).astype(np.int64)
    row = np.floor(uv[:, 1]).astype(np.int64)
    inside = proj.valid & (col >= 0) & (col < K.width) & (row >= 0) & (row < K.height)
    return row, col, inside


def remove_hand_points(
    pc: PointCloud,
    mask: np.ndarray,
    K: Intrinsics,
    pose_cam_from_global: PoseSE3,
) -> PointCloud:
    mask = np.asarray(mask)
    if mask.shape != (K.height, K.width):
        raise MaskSizeMismatch(
            f"mask shape {mask.shape} does not match image {(K.height, K.width)}"
        )
    if len(pc) == 0:
        return pc

    cam = PointCloud(pose_cam_from_global.apply(pc.points), frame="camera")
    row, col, inside = pixel_indices(K, project_points(K, cam))

    on_hand = np.zeros(len(pc), dtype=bool)
    on_hand[inside] = mask[row[inside], col[inside]].astype(bool)
    kept = pc.points[~on_hand]
    logger.debug("Hand removal | total=%d | removed=%d", len(pc), int(on_hand.sum()))
    return PointCloud(kept, frame=pc.frame)
