import os
from pathlib import Path

import numpy as np
import pytest
import yaml

os.environ.setdefault("SHOW_PROGRESS", "false")

from src.config import build_config  # noqa: E402
from src.data.dataset import dataset_intrinsics  # noqa: E402
from src.data.synth import synth_scene, synth_sequence  # noqa: E402
from src.geometry import Intrinsics  # noqa: E402

# Small enough for per-test training runs on a laptop CPU.
TINY_OVERLAY = {
    "data": {
        "n_frames": 10,
        "n_train": 4,
        "n_test": 2,
        "image_width": 160,
        "image_height": 120,
        "focal": 125.0,
    },
    "model": {
        "f": 16,
        "x": 24,
        "voxel_dims": [8, 8, 8],
        "voxel_hidden": 4,
        "eam": {"d_state": 4},
        "sat": {"n_head": 2, "d_ffn": 32},
    },
    "schedule": {"T": 20, "k_htp": 3},
    "train": {"epochs": 2, "batch_size": 2, "checkpoint_every": 1, "sanity_epochs": 1},
    "eval": {"plots": 1},
}


def _merge(base: dict, overlay: dict) -> dict:
    out = dict(base)
    for k, v in overlay.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def K() -> Intrinsics:
    return Intrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)


@pytest.fixture
def tiny_overlay(tmp_path):
    return _merge(TINY_OVERLAY, {"data": {"root": str(tmp_path / "data")}})


@pytest.fixture
def tiny_cfg(tiny_overlay):
    return build_config(tiny_overlay)


@pytest.fixture
def make_cfg(tiny_overlay):
    """Tiny config with an extra overlay on top."""

    def factory(extra=None):
        return build_config(_merge(tiny_overlay, extra or {}))

    return factory


@pytest.fixture
def tiny_sequences(tiny_cfg):
    """A few deterministic sequences at the tiny data settings."""
    d = tiny_cfg.data
    K = dataset_intrinsics(d)
    modes = ("head_leads", "hand_leads", "neutral", "neutral")
    return [
        synth_sequence(synth_scene(100 + i), modes[i], d.n_past, d.n_future, seed=i, intrinsics=K, seq_id=f"t-{i}")
        for i in range(len(modes))
    ]


@pytest.fixture
def config_file(tmp_path, tiny_overlay):
    """Writes the tiny overlay as a YAML run configuration."""

    def write(extra=None, name="run.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(_merge(tiny_overlay, extra or {})), encoding="utf-8")
        return path

    return write
