import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.config import RunConfig
from src.data.sequence import Sequence
from src.encoders import VisionProvider, egomotion_inputs, vision_features
from src.geometry import OccupancyGrid, PointCloud, grid_origin_for, remove_hand_points, transform_points, voxelize

logger = logging.getLogger(__name__)


@dataclass
class Example:
    """Model-ready inputs of one sequence."""

    sequence: Sequence
    ego_input: np.ndarray
    x_sem: np.ndarray
    grid: Optional[OccupancyGrid]
    training: bool

    @property
    def id(self) -> str:
        return self.sequence.id

    @property
    def n_past(self) -> int:
        return self.sequence.n_past

    @property
    def n_future(self) -> int:
        return self.sequence.n_future

    @property
    def waypoints(self) -> np.ndarray:
        return self.sequence.waypoints

    @property
    def past_waypoints(self) -> np.ndarray:
        return self.sequence.waypoints[:self.n_past]

    @property
    def future_waypoints(self) -> np.ndarray:
        return self.sequence.waypoints[self.n_past:]


def past_scene_cloud(seq: Sequence) -> PointCloud:
    """Global-frame points of the past frames with the hand/arm pixels removed."""
    parts: List[np.ndarray] = []
    for k in range(seq.n_past):
        world = transform_points(seq.poses[k], seq.point_clouds[k], frame="global")
        kept = remove_hand_points(world, seq.masks[k], seq.intrinsics, seq.camera_from_global(k))
        parts.append(kept.points)
    points = np.concatenate(parts, axis=0) if parts else np.zeros((0, 3))
    return PointCloud(points, frame="global")


def scene_grid(seq: Sequence, cfg: RunConfig) -> OccupancyGrid:
    dims = tuple(cfg.model.voxel_dims)
    res = cfg.model.voxel_resolution
    origin = grid_origin_for(seq.waypoints[:seq.n_past], resolution=res, dims=dims)
    return voxelize(past_scene_cloud(seq), origin, resolution=res, dims=dims)


def ego_rows(seq: Sequence, mode: str, training: bool) -> int:
    """Observed egomotion rows: everything in training, the past at inference for diffused modes."""
    if training or mode in ("constant-last", "none"):
        return seq.n_frames
    return seq.n_past


def prepare_example(seq: Sequence, cfg: RunConfig, provider: VisionProvider, training: bool) -> Example:
    """
    X_sem covers N_p + L frames, L = N_f in training and 0 at inference.
    Disabled modalities yield zero features, an empty prompt, or no grid.
    """
    dtype = np.dtype(cfg.train.dtype)
    mode = cfg.egomotion_mode
    ego = egomotion_inputs(seq, mode, ego_rows(seq, mode, training)).astype(dtype)

    mods = cfg.modalities
    prompt = cfg.provider.prompt if mods.text else ""
    L = seq.n_future if training else 0
    X = vision_features(provider, seq, seq.n_past, L, prompt=prompt, enabled=mods.images, dtype=dtype)

    grid = scene_grid(seq, cfg) if mods.point_clouds else None
    if grid is not None:
        logger.debug("Example %s | occupied=%d | training=%s", seq.id, grid.occupied_count(), training)
    return Example(sequence=seq, ego_input=ego, x_sem=np.asarray(X.X.data), grid=grid, training=training)
