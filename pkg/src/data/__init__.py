from src.data.dataset import (
    DatasetManifest,
    build_dataset,
    dataset_intrinsics,
    generate_split,
    load_dataset,
    read_manifest,
)
from src.data.examples import Example, past_scene_cloud, prepare_example, scene_grid
from src.data.io import read_sequence, write_sequence
from src.data.sequence import (
    DEFAULT_SPLIT_RATIO,
    SYNERGY_MODES,
    Sequence,
    SequenceView,
    downsample_sequence,
    past_count,
    resplit,
    split_sequence,
)
from src.data.synth import DEFAULT_INTRINSICS, PROFILES, SceneModel, synth_scene, synth_sequence

__all__ = [
    "DEFAULT_INTRINSICS",
    "DEFAULT_SPLIT_RATIO",
    "DatasetManifest",
    "Example",
    "PROFILES",
    "SYNERGY_MODES",
    "SceneModel",
    "Sequence",
    "SequenceView",
    "build_dataset",
    "dataset_intrinsics",
    "downsample_sequence",
    "generate_split",
    "load_dataset",
    "past_count",
    "past_scene_cloud",
    "prepare_example",
    "read_manifest",
    "read_sequence",
    "resplit",
    "scene_grid",
    "split_sequence",
    "synth_scene",
    "synth_sequence",
    "write_sequence",
]
