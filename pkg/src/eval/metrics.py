from typing import List, Sequence, Tuple

import numpy as np

from src.errors import LengthMismatch
from src.geometry import Intrinsics, PointCloud, PoseSE3, project_points


def _pair(pred, gt) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.ndim == 1:
        pred, gt = pred[None], gt.reshape(1, -1)
    if len(pred) == 0 or pred.shape != gt.shape:
        raise LengthMismatch(f"prediction {pred.shape} vs ground truth {gt.shape}")
    return pred, gt


def displacements(pred, gt) -> np.ndarray:
    pred, gt = _pair(pred, gt)
    return np.linalg.norm(pred - gt, axis=-1)


def ade(pred, gt) -> float:
    """Mean Euclidean distance over waypoints."""
    return float(displacements(pred, gt).mean())


def fde(pred, gt) -> float:
    """Euclidean distance of the final waypoint."""
    return float(displacements(pred, gt)[-1])


def to_2d_normalized(
    waypoints,
    K: Intrinsics,
    camera_from_global: Sequence[PoseSE3],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projects each global waypoint with its own frame's camera and divides
    u by the image width and v by the image height.
    Returns (N×2 coordinates, N validity flags); invalid rows are nan.
    """
    points = np.asarray(waypoints, dtype=np.float64).reshape(-1, 3)
    if len(points) != len(camera_from_global):
        raise LengthMismatch(f"{len(points)} waypoints vs {len(camera_from_global)} camera poses")
    coords = np.full((len(points), 2), np.nan)
    valid = np.zeros(len(points), dtype=bool)
    for i, (p, pose) in enumerate(zip(points, camera_from_global)):
        if not np.all(np.isfinite(p)):
            continue
        proj = project_points(K, PointCloud(pose.apply(p[None]), frame="camera"))
        if proj.valid[0]:
            coords[i] = proj.uv[0] / np.array([K.width, K.height], dtype=np.float64)
            valid[i] = True
    return coords, valid


def metrics_2d(pred_2d: np.ndarray, pred_valid: np.ndarray, gt_2d: np.ndarray, gt_valid: np.ndarray) -> Tuple[float, float, int]:
    """
    ADE/FDE over the pairs where both projections are valid; FDE uses the
    last valid pair. Returns (ade2d, fde2d, excluded pairs); nan when no
    pair is valid.
    """
    if len(pred_2d) != len(gt_2d):
        raise LengthMismatch(f"{len(pred_2d)} predicted vs {len(gt_2d)} ground-truth projections")
    both = np.asarray(pred_valid, dtype=bool) & np.asarray(gt_valid, dtype=bool)
    excluded = int(len(both) - both.sum())
    if not both.any():
        return float("nan"), float("nan"), excluded
    d = np.linalg.norm(pred_2d[both] - gt_2d[both], axis=-1)
    return float(d.mean()), float(d[-1]), excluded


def finite_mean(values: List[float]) -> float:
    vals = np.asarray(values, dtype=np.float64)
    vals = vals[np.isfinite(vals)]
    return float(vals.mean()) if vals.size else float("nan")
