"""
Synthetic egocentric interaction generator.

A tabletop plane with a few boxes is seen by a head camera; the hand
reaches for the top of one box while the camera turns partway toward it.
The synergy mode decides who leads: the camera (head_leads), the hand
(hand_leads) or neither (neutral).
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.data.sequence import SYNERGY_MODES, Sequence
from src.geometry import (
    Intrinsics,
    PointCloud,
    PoseSE3,
    homography_from_camera_motion,
    project_points,
    unproject_points,
)

logger = logging.getLogger(__name__)

DEFAULT_INTRINSICS = Intrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)

PROFILES = ("min_jerk", "linear")

PLANE_DEPTH_RANGE = (0.6, 1.0)
PLANE_TILT_RANGE = (0.35, 0.75)
CAMERA_TURN_FRACTION = 0.6
CAMERA_ADVANCE = 0.05
HAND_ARC_HEIGHT = 0.05
LAG_RANGE = (2, 4)

PLANE_SAMPLES = 400
BOX_TOP_SAMPLES = 30
BOX_SIDE_SAMPLES = 8
ARM_SAMPLES = 80
HAND_RADIUS_M = 0.05
ARM_RADIUS_M = 0.035
ARM_MARGIN_PX = 1.5


@dataclass(frozen=True)
class Box:
    """Box resting on the table; extents are along the table axes (e1, e2, normal)."""

    center: np.ndarray
    extents: np.ndarray


@dataclass(frozen=True)
class SceneModel:
    plane_normal: np.ndarray
    plane_depth: float
    tilt: float
    boxes: List[Box]
    target: np.ndarray
    seed: int
    anchor: np.ndarray = field(repr=False)

    def axes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(e1, e2, n): in-plane axes and the normal pointing to the camera side."""
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, np.cos(self.tilt), -np.sin(self.tilt)])
        return e1, e2, self.plane_normal

    def signed_height(self, points: np.ndarray) -> np.ndarray:
        """nᵀX + d; positive on the camera side of the plane."""
        return np.asarray(points, dtype=np.float64) @ self.plane_normal + self.plane_depth

    def plane_coords(self, point: np.ndarray) -> Tuple[float, float]:
        e1, e2, _ = self.axes()
        rel = np.asarray(point, dtype=np.float64) - self.anchor
        return float(rel @ e1), float(rel @ e2)


def _footprints_overlap(a: Tuple[float, float, float, float], b: Tuple[float, float, float, float], gap: float) -> bool:
    au, av, aw, ad = a
    bu, bv, bw, bd = b
    return abs(au - bu) < (aw + bw) / 2 + gap and abs(av - bv) < (ad + bd) / 2 + gap


def synth_scene(seed: int) -> SceneModel:
    rng = np.random.default_rng(seed)
    tilt = float(rng.uniform(*PLANE_TILT_RANGE))
    depth = float(rng.uniform(*PLANE_DEPTH_RANGE))
    normal = -np.array([0.0, np.sin(tilt), np.cos(tilt)])
    anchor = np.array([0.0, 0.0, depth / np.cos(tilt)])
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, np.cos(tilt), -np.sin(tilt)])

    n_boxes = int(rng.integers(2, 5))
    footprints: List[Tuple[float, float, float, float]] = []
    boxes: List[Box] = []
    for _ in range(200 * n_boxes):
        if len(boxes) == n_boxes:
            break
        cand = (
            float(rng.uniform(-0.2, 0.2)),
            float(rng.uniform(-0.15, 0.15)),
            float(rng.uniform(0.06, 0.12)),
            float(rng.uniform(0.06, 0.12)),
        )
        height = float(rng.uniform(0.04, 0.12))
        if any(_footprints_overlap(cand, other, gap=0.01) for other in footprints):
            continue
        footprints.append(cand)
        u, v, w, d = cand
        center = anchor + u * e1 + v * e2 + normal * (height / 2)
        boxes.append(Box(center=center, extents=np.array([w, d, height])))

    chosen = boxes[int(rng.integers(len(boxes)))]
    w, d, h = chosen.extents
    target = (
        chosen.center
        + normal * (h / 2)
        + e1 * rng.uniform(-0.3, 0.3) * w
        + e2 * rng.uniform(-0.3, 0.3) * d
    )
    logger.debug("Scene %d | boxes=%d | depth=%.3f | tilt=%.3f", seed, len(boxes), depth, tilt)
    return SceneModel(
        plane_normal=normal,
        plane_depth=depth,
        tilt=tilt,
        boxes=boxes,
        target=target,
        seed=seed,
        anchor=anchor,
    )


# ----------------- MOTION -----------------
def min_jerk(tau: np.ndarray) -> np.ndarray:
    tau = np.clip(tau, 0.0, 1.0)
    return 10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5


def _look_rotation(yaw: float, pitch: float) -> np.ndarray:
    """Columns are the camera's right, down and forward axes in the global frame."""
    forward = np.array([np.sin(yaw) * np.cos(pitch), np.sin(pitch), np.cos(yaw) * np.cos(pitch)])
    right = np.cross([0.0, 1.0, 0.0], forward)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    return np.column_stack([right, down, forward])


def _lags(mode: str, rng: np.random.Generator) -> Tuple[int, int]:
    """(camera lag, hand lag) in frames."""
    lag = int(rng.integers(LAG_RANGE[0], LAG_RANGE[1] + 1))
    if mode == "head_leads":
        return 0, lag
    if mode == "hand_leads":
        return lag, 0
    return 0, 0


def hand_path(scene: SceneModel, n_frames: int, lag: int, profile: str) -> np.ndarray:
    e1, e2, n = scene.axes()
    tu, tv = scene.plane_coords(scene.target)
    start = scene.anchor + (-0.5 * tu) * e1 + (tv + 0.18) * e2 + 0.18 * n
    duration = n_frames + 2
    tau = (np.arange(n_frames) - lag) / duration
    if profile == "linear":
        s = tau
        lift = np.zeros_like(s)
    else:
        s = min_jerk(tau)
        lift = HAND_ARC_HEIGHT * np.sin(np.pi * s)
    return start + s[:, None] * (scene.target - start) + lift[:, None] * n


def camera_path(scene: SceneModel, n_frames: int, lag: int) -> List[PoseSE3]:
    tx, ty, tz = scene.target
    yaw_t = np.arctan2(tx, tz)
    pitch_t = np.arctan2(ty, np.hypot(tx, tz))
    heading = scene.target / np.linalg.norm(scene.target)
    s = min_jerk((np.arange(n_frames) - lag) / (n_frames + 2))
    poses = []
    for k in range(n_frames):
        R = _look_rotation(CAMERA_TURN_FRACTION * yaw_t * s[k], CAMERA_TURN_FRACTION * pitch_t * s[k])
        poses.append(PoseSE3(R, CAMERA_ADVANCE * s[k] * heading))
    return poses


# ----------------- SENSORS -----------------
def _scene_points(scene: SceneModel, rng: np.random.Generator) -> np.ndarray:
    e1, e2, n = scene.axes()
    uv = np.column_stack([rng.uniform(-0.45, 0.45, PLANE_SAMPLES), rng.uniform(-0.4, 0.4, PLANE_SAMPLES)])
    chunks = [scene.anchor + uv[:, :1] * e1 + uv[:, 1:] * e2]
    for box in scene.boxes:
        w, d, h = box.extents
        top = box.center + n * (h / 2)
        a = rng.uniform(-0.5, 0.5, (BOX_TOP_SAMPLES, 2))
        chunks.append(top + a[:, :1] * w * e1 + a[:, 1:] * d * e2)
        for axis, half, span_axis, span in ((e1, w / 2, e2, d), (e2, d / 2, e1, w)):
            for sign in (-1.0, 1.0):
                b = rng.uniform(-0.5, 0.5, (BOX_SIDE_SAMPLES, 2))
                chunks.append(box.center + sign * half * axis + b[:, :1] * span * span_axis + b[:, 1:] * h * n)
    return np.concatenate(chunks, axis=0)


def _segment_distance(px: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    s = np.clip(((px - a) @ ab) / max(float(ab @ ab), 1e-12), 0.0, 1.0)
    return np.linalg.norm(px - (a + s[..., None] * ab), axis=-1)


def hand_mask_and_arm(
    K: Intrinsics,
    hand_cam: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rasterizes the hand disk plus an arm capsule reaching the bottom border.
    Returns the (H, W) mask and camera-frame arm points lying inside it.
    """
    mask = np.zeros((K.height, K.width), dtype=bool)
    proj = project_points(K, PointCloud(hand_cam.reshape(1, 3)))
    if not proj.valid[0]:
        return mask, np.zeros((0, 3))
    z = float(hand_cam[2])
    hand_px = proj.uv[0]
    base_px = np.array([0.5 * (hand_px[0] + K.cx) + 60.0, K.height + 20.0])
    r_hand = float(np.clip(K.fx * HAND_RADIUS_M / z, 4.0, 60.0))
    r_arm = float(np.clip(K.fx * ARM_RADIUS_M / z, 3.0, 45.0))

    rows, cols = np.mgrid[0:K.height, 0:K.width]
    centers = np.stack([cols + 0.5, rows + 0.5], axis=-1).astype(np.float64)
    mask |= np.linalg.norm(centers - hand_px, axis=-1) <= r_hand
    mask |= _segment_distance(centers, hand_px, base_px) <= r_arm

    s = rng.uniform(0.0, 1.0, ARM_SAMPLES)
    direction = base_px - hand_px
    perp = np.array([-direction[1], direction[0]]) / max(np.linalg.norm(direction), 1e-12)
    offset = rng.uniform(-(r_arm - ARM_MARGIN_PX), r_arm - ARM_MARGIN_PX, ARM_SAMPLES)
    uv = hand_px + s[:, None] * direction + offset[:, None] * perp
    inside = (uv[:, 0] >= 0) & (uv[:, 0] < K.width) & (uv[:, 1] >= 0) & (uv[:, 1] < K.height)
    depth = z * (1.0 - 0.5 * s)
    arm = unproject_points(K, uv[inside], depth[inside]).points
    return mask, arm


def _in_view(K: Intrinsics, cam_points: np.ndarray) -> np.ndarray:
    proj = project_points(K, PointCloud(cam_points))
    uv = np.where(proj.valid[:, None], proj.uv, -1.0)
    return proj.valid & (uv[:, 0] >= 0) & (uv[:, 0] < K.width) & (uv[:, 1] >= 0) & (uv[:, 1] < K.height)


def _float32_exact(points: np.ndarray) -> np.ndarray:
    return np.asarray(points, dtype=np.float32).astype(np.float64)


def synth_sequence(
    scene: SceneModel,
    synergy_mode: str,
    n_past: int,
    n_future: int,
    seed: int,
    intrinsics: Optional[Intrinsics] = None,
    profile: str = "min_jerk",
    seq_id: Optional[str] = None,
) -> Sequence:
    if synergy_mode not in SYNERGY_MODES:
        raise ValueError(f"unknown synergy mode {synergy_mode!r}")
    if profile not in PROFILES:
        raise ValueError(f"unknown motion profile {profile!r}")
    if n_past < 2 or n_future < 2:
        raise ValueError(f"N_p and N_f must be ≥ 2, got {n_past}, {n_future}")
    K = intrinsics or DEFAULT_INTRINSICS
    n_frames = n_past + n_future
    rng = np.random.default_rng([seed, scene.seed, SYNERGY_MODES.index(synergy_mode)])

    cam_lag, hand_lag = _lags(synergy_mode, rng)
    poses = camera_path(scene, n_frames, cam_lag)
    waypoints = hand_path(scene, n_frames, hand_lag, profile)
    world = _scene_points(scene, rng)

    homographies, clouds, masks = [], [], []
    for k, pose in enumerate(poses):
        cam_from_global = pose.inverse()
        homographies.append(
            homography_from_camera_motion(
                K, cam_from_global.rotation, cam_from_global.translation, scene.plane_normal, scene.plane_depth
            )
        )
        cam_points = cam_from_global.apply(world)
        cam_points = cam_points[_in_view(K, cam_points)]
        mask, arm = hand_mask_and_arm(K, cam_from_global.apply(waypoints[k]), rng)
        clouds.append(PointCloud(_float32_exact(np.concatenate([cam_points, arm], axis=0)), frame="camera"))
        masks.append(mask)

    seq = Sequence(
        id=seq_id or f"seq-{scene.seed:06d}-{seed:06d}",
        n_past=n_past,
        n_future=n_future,
        intrinsics=K,
        poses=poses,
        waypoints=waypoints,
        homographies=homographies,
        point_clouds=clouds,
        masks=masks,
        synergy_mode=synergy_mode,
    )
    logger.debug(
        "Sequence %s | mode=%s | lags=(cam %d, hand %d) | profile=%s",
        seq.id, synergy_mode, cam_lag, hand_lag, profile,
    )
    return seq
