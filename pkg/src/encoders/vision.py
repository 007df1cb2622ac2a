import logging
import zlib
from pathlib import Path
from typing import Dict, Optional, Protocol

import numpy as np

from src.encoders.features import VisionFeatures
from src.errors import ProviderUnavailable
from src.geometry import PointCloud, project_points
from src.numerics import Tensor

logger = logging.getLogger(__name__)

HAND_PROMPT = "hand"
POSITION_FREQS = 8


class VisionProvider(Protocol):
    dim: int

    def features(self, sequence, n_frames: int, prompt: str) -> np.ndarray:
        """(n_frames × dim) features of the first n_frames frames."""


def hand_pixels(sequence, n_frames: int) -> np.ndarray:
    """Normalized (u/width, v/height) of the hand per frame; NaN when behind the camera."""
    K = sequence.intrinsics
    out = np.full((n_frames, 2), np.nan)
    for k in range(n_frames):
        cam = sequence.poses[k].inverse().apply(sequence.waypoints[k]).reshape(1, 3)
        proj = project_points(K, PointCloud(cam))
        if proj.valid[0]:
            out[k] = proj.uv[0] / np.array([K.width, K.height])
    return out


class SyntheticProvider:
    """
    Deterministic stand-in for a grounded vision encoder: a sine encoding of
    the projected hand pixel followed by a seeded scene embedding. An empty
    prompt grounds nothing, so the hand channels are zero.
    """

    def __init__(self, seed: int = 0, dim: int = 32):
        if dim < 2 * POSITION_FREQS + 1:
            raise ValueError(f"synthetic features need more than {2 * POSITION_FREQS} channels, got {dim}")
        self.seed = seed
        self.dim = dim

    def scene_embedding(self, sequence_id: str) -> np.ndarray:
        rng = np.random.default_rng([self.seed, zlib.crc32(sequence_id.encode("utf-8"))])
        return 0.5 * rng.standard_normal(self.dim - 2 * POSITION_FREQS)

    def features(self, sequence, n_frames: int, prompt: str = HAND_PROMPT) -> np.ndarray:
        hand = np.zeros((n_frames, 2 * POSITION_FREQS))
        if prompt.strip():
            uv = np.nan_to_num(hand_pixels(sequence, n_frames), nan=0.0)
            scales = (2.0 ** np.arange(POSITION_FREQS)) * np.pi
            hand = np.concatenate([np.sin(uv[:, :1] * scales), np.sin(uv[:, 1:] * scales)], axis=1)
        scene = np.broadcast_to(self.scene_embedding(sequence.id), (n_frames, self.dim - 2 * POSITION_FREQS))
        return np.concatenate([hand, scene], axis=1)


class FileFeatureProvider:
    """Precomputed features: an npz archive keyed by sequence id, (N_p+L)×x float32 each."""

    def __init__(self, path: Path, dim: int = 32):
        self.path = Path(path)
        self._records: Optional[Dict[str, np.ndarray]] = None
        self.dim = dim

    def _load(self) -> Dict[str, np.ndarray]:
        if self._records is None:
            if not self.path.exists():
                raise ProviderUnavailable(f"feature archive not found: {self.path}")
            with np.load(self.path, allow_pickle=False) as archive:
                self._records = {k: archive[k].astype(np.float32) for k in archive.files}
            logger.info("Feature archive loaded | path=%s | records=%d", self.path, len(self._records))
        return self._records

    def features(self, sequence, n_frames: int, prompt: str = HAND_PROMPT) -> np.ndarray:
        records = self._load()
        if sequence.id not in records:
            raise ProviderUnavailable(f"no features for sequence {sequence.id} in {self.path}")
        rec = records[sequence.id]
        if rec.ndim != 2 or rec.shape[1] != self.dim:
            raise ProviderUnavailable(f"features for {sequence.id} have shape {rec.shape}, expected (…, {self.dim})")
        if rec.shape[0] < n_frames:
            raise ProviderUnavailable(f"features for {sequence.id} have {rec.shape[0]} rows, need {n_frames}")
        return rec[:n_frames].astype(np.float64)


class HttpFeatureProvider:
    def __init__(self, base_url: Optional[str] = None, dim: int = 32, timeout: Optional[float] = None):
        from src.services.features_api import FeaturesAPI
        from src.services.http_client import FeatureHttpClient

        self.api = FeaturesAPI(FeatureHttpClient(base_url=base_url, timeout=timeout))
        self.dim = dim

    def features(self, sequence, n_frames: int, prompt: str = HAND_PROMPT) -> np.ndarray:
        feats = self.api.fetch(sequence.id, n_frames, prompt)
        if feats.shape[1] != self.dim:
            raise ProviderUnavailable(f"feature service returned {feats.shape[1]} channels, expected {self.dim}")
        return feats.astype(np.float64)


def vision_features(
    provider: VisionProvider,
    sequence,
    n_past: int,
    L: int,
    prompt: str = HAND_PROMPT,
    enabled: bool = True,
    dtype=np.float64,
) -> VisionFeatures:
    """X_sem for the first N_p + L frames; the zero matrix when the image modality is off."""
    n = n_past + L
    if enabled:
        X = np.asarray(provider.features(sequence, n, prompt), dtype=dtype)
    else:
        X = np.zeros((n, provider.dim), dtype=dtype)
    return VisionFeatures(X=Tensor(X), n_past=n_past, L=L)


def make_provider(kind: str, dim: int, seed: int = 0, path: Optional[str] = None, base_url: Optional[str] = None):
    if kind == "synthetic":
        return SyntheticProvider(seed=seed, dim=dim)
    if kind == "file":
        if not path:
            raise ProviderUnavailable("file provider needs a path")
        return FileFeatureProvider(Path(path), dim=dim)
    if kind == "http":
        return HttpFeatureProvider(base_url=base_url, dim=dim)
    raise ProviderUnavailable(f"unknown provider kind {kind!r}")


def provider_from_config(cfg) -> VisionProvider:
    """Provider of a run configuration; the http kind targets `settings.feature_service_url`."""
    from src.config import settings

    return make_provider(
        cfg.provider.kind, cfg.model.x, seed=cfg.provider.seed, path=cfg.provider.path,
        base_url=settings.feature_service_url,
    )
