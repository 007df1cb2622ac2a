import logging
import math
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from src.errors import DegenerateSplit
from src.geometry import Homography, Intrinsics, PointCloud, PoseSE3

logger = logging.getLogger(__name__)

SYNERGY_MODES = ("head_leads", "hand_leads", "neutral")
DEFAULT_SPLIT_RATIO = 0.6


@dataclass
class Sequence:
    """
    One egocentric episode. The global frame is the first camera's frame;
    `poses[t]` maps camera-t coordinates to global coordinates and
    `homographies[t]` maps first-frame pixels to frame-t pixels.
    """

    id: str
    n_past: int
    n_future: int
    intrinsics: Intrinsics
    poses: List[PoseSE3]
    waypoints: np.ndarray
    homographies: List[Homography]
    point_clouds: List[PointCloud]
    masks: List[np.ndarray]
    synergy_mode: str = "neutral"

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=np.float64).reshape(-1, 3)
        n = self.n_frames
        sizes = {len(self.poses), len(self.homographies), len(self.point_clouds), len(self.masks), len(self.waypoints)}
        if sizes != {n}:
            raise ValueError(f"sequence {self.id}: per-frame fields disagree with n_past+n_future={n}: {sorted(sizes)}")
        if not np.all(np.isfinite(self.waypoints)):
            raise ValueError(f"sequence {self.id}: non-finite waypoint")
        if self.synergy_mode not in SYNERGY_MODES:
            raise ValueError(f"unknown synergy mode {self.synergy_mode!r}")

    @property
    def n_frames(self) -> int:
        return self.n_past + self.n_future

    def camera_from_global(self, k: int) -> PoseSE3:
        return self.poses[k].inverse()


@dataclass(frozen=True)
class SequenceView:
    """Contiguous frame window [start, stop) of a sequence."""

    sequence: Sequence
    start: int
    stop: int

    def __len__(self) -> int:
        return self.stop - self.start

    @property
    def frames(self) -> range:
        return range(self.start, self.stop)

    @property
    def waypoints(self) -> np.ndarray:
        return self.sequence.waypoints[self.start:self.stop]

    @property
    def poses(self) -> List[PoseSE3]:
        return self.sequence.poses[self.start:self.stop]

    @property
    def homographies(self) -> List[Homography]:
        return self.sequence.homographies[self.start:self.stop]

    @property
    def point_clouds(self) -> List[PointCloud]:
        return self.sequence.point_clouds[self.start:self.stop]

    @property
    def masks(self) -> List[np.ndarray]:
        return self.sequence.masks[self.start:self.stop]


def past_count(total: int, ratio: float) -> int:
    """round(ratio · total) with halves rounded up."""
    if not 0.0 < ratio < 1.0:
        raise DegenerateSplit(f"split ratio must lie in (0, 1), got {ratio}")
    n_past = int(math.floor(ratio * total + 0.5))
    if n_past < 1 or total - n_past < 1:
        raise DegenerateSplit(f"ratio {ratio} on {total} frames leaves N_p={n_past}, N_f={total - n_past}")
    return n_past


def split_sequence(seq: Sequence, ratio: float = DEFAULT_SPLIT_RATIO) -> Tuple[SequenceView, SequenceView]:
    n_past = past_count(seq.n_frames, ratio)
    return SequenceView(seq, 0, n_past), SequenceView(seq, n_past, seq.n_frames)


def resplit(seq: Sequence, ratio: float) -> Sequence:
    n_past = past_count(seq.n_frames, ratio)
    return replace(seq, n_past=n_past, n_future=seq.n_frames - n_past)


def downsample_sequence(seq: Sequence, stride: int, ratio: float = DEFAULT_SPLIT_RATIO) -> Sequence:
    """Keeps every `stride`-th frame starting at frame 0 and re-splits."""
    if stride < 1:
        raise ValueError(f"stride must be ≥ 1, got {stride}")
    keep = list(range(0, seq.n_frames, stride))
    n_past = past_count(len(keep), ratio)
    logger.debug("Downsample %s | stride=%d | frames=%d->%d", seq.id, stride, seq.n_frames, len(keep))
    return Sequence(
        id=seq.id,
        n_past=n_past,
        n_future=len(keep) - n_past,
        intrinsics=seq.intrinsics,
        poses=[seq.poses[k] for k in keep],
        waypoints=seq.waypoints[keep],
        homographies=[seq.homographies[k] for k in keep],
        point_clouds=[seq.point_clouds[k] for k in keep],
        masks=[seq.masks[k] for k in keep],
        synergy_mode=seq.synergy_mode,
    )
