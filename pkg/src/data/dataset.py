import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError
from tqdm import tqdm

from src.config import DataConfig, settings
from src.data.io import VERSION, read_sequence, write_sequence
from src.data.sequence import SYNERGY_MODES, Sequence
from src.data.synth import synth_scene, synth_sequence
from src.errors import DatasetIoError, FormatError
from src.geometry import Intrinsics

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
SPLITS = ("train", "test")
SUFFIX = ".htpseq"


class SplitInfo(BaseModel):
    count: int
    seed: int
    modes: Dict[str, int] = Field(default_factory=dict)
    ids: List[str] = Field(default_factory=list)


class DatasetManifest(BaseModel):
    format_version: str = VERSION.decode()
    n_frames: int
    n_past: int
    n_future: int
    profile: str
    mode_mix: Dict[str, float]
    config_hash: Optional[str] = None
    splits: Dict[str, SplitInfo]


def dataset_intrinsics(cfg: DataConfig) -> Intrinsics:
    return Intrinsics(
        fx=cfg.focal, fy=cfg.focal,
        cx=cfg.image_width / 2.0, cy=cfg.image_height / 2.0,
        width=cfg.image_width, height=cfg.image_height,
    )


def _draw_mode(rng: np.random.Generator, mix: Dict[str, float]) -> str:
    modes = [m for m in SYNERGY_MODES if mix.get(m, 0.0) > 0]
    weights = np.array([mix[m] for m in modes], dtype=np.float64)
    return modes[int(rng.choice(len(modes), p=weights / weights.sum()))]


def _derived_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def generate_split(cfg: DataConfig, split: str) -> List[Sequence]:
    """Deterministic sequences of one split; index i depends only on (split seed, i)."""
    seed, count = (cfg.train_seed, cfg.n_train) if split == "train" else (cfg.test_seed, cfg.n_test)
    K = dataset_intrinsics(cfg)
    sequences = []
    for i in tqdm(range(count), desc=f"synth {split}", disable=not settings.show_progress):
        mode = _draw_mode(np.random.default_rng([seed, i]), cfg.mode_mix)
        scene = synth_scene(_derived_seed(seed, i, 0))
        sequences.append(
            synth_sequence(
                scene, mode, cfg.n_past, cfg.n_future,
                seed=_derived_seed(seed, i, 1), intrinsics=K, profile=cfg.profile, seq_id=f"{split}-{i:05d}",
            )
        )
    return sequences


def build_dataset(root: Path, cfg: DataConfig, config_hash: Optional[str] = None) -> DatasetManifest:
    root = Path(root)
    splits: Dict[str, SplitInfo] = {}
    for split in SPLITS:
        split_dir = root / split
        split_dir.mkdir(parents=True, exist_ok=True)
        sequences = generate_split(cfg, split)
        modes: Dict[str, int] = {}
        for seq in sequences:
            write_sequence(seq, split_dir / f"{seq.id}{SUFFIX}")
            modes[seq.synergy_mode] = modes.get(seq.synergy_mode, 0) + 1
        splits[split] = SplitInfo(
            count=len(sequences),
            seed=cfg.train_seed if split == "train" else cfg.test_seed,
            modes=modes,
            ids=[s.id for s in sequences],
        )
        logger.info("Split written | split=%s | count=%d | modes=%s", split, len(sequences), modes)

    manifest = DatasetManifest(
        n_frames=cfg.n_frames,
        n_past=cfg.n_past,
        n_future=cfg.n_future,
        profile=cfg.profile,
        mode_mix=cfg.mode_mix,
        config_hash=config_hash,
        splits=splits,
    )
    (root / MANIFEST).write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    return manifest


def read_manifest(root: Path) -> DatasetManifest:
    path = Path(root) / MANIFEST
    if not path.exists():
        raise DatasetIoError(f"dataset manifest not found: {path}")
    try:
        return DatasetManifest.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (ValueError, ValidationError) as e:
        raise FormatError(f"invalid dataset manifest {path}: {e}") from e


def load_dataset(root: Path, split: str) -> List[Sequence]:
    root = Path(root)
    if split not in SPLITS:
        raise DatasetIoError(f"unknown split {split!r}; expected one of {SPLITS}")
    if not root.is_dir():
        raise DatasetIoError(f"dataset directory not found: {root}")
    read_manifest(root)
    split_dir = root / split
    if not split_dir.is_dir():
        raise DatasetIoError(f"dataset split directory not found: {split_dir}")
    files = sorted(split_dir.glob(f"*{SUFFIX}"))
    if not files:
        raise DatasetIoError(f"no sequence files in {split_dir}")
    sequences = [read_sequence(p) for p in files]
    logger.info("Dataset loaded | split=%s | count=%d | dir=%s", split, len(sequences), root)
    return sequences
