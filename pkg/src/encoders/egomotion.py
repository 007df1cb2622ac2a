import logging
from typing import List, Literal, Union

import numpy as np

from src.encoders.features import EgomotionFeatures
from src.errors import EmptySequence, ShapeMismatch
from src.geometry import Homography, PoseSE3
from src.numerics import MLP, Module, Tensor, as_tensor

logger = logging.getLogger(__name__)

EgomotionKind = Literal["homography", "se3"]

INPUT_DIMS = {"homography": 9, "se3": 12}


def input_kind(mode: str) -> EgomotionKind:
    """Matrix family fed to the encoder for an egomotion mode."""
    return "se3" if mode == "se3" else "homography"


class EgomotionEncoder(Module):
    """Row-wise two-layer perceptron from flattened matrices to f channels."""

    def __init__(self, f: int, kind: EgomotionKind, rng: np.random.Generator, dtype=np.float64):
        self.kind = kind
        self.mlp = MLP(INPUT_DIMS[kind], f, f, rng, dtype=dtype)

    def forward(self, flat: Tensor) -> Tensor:
        flat = as_tensor(flat)
        if flat.shape[-1] != INPUT_DIMS[self.kind]:
            raise ShapeMismatch(f"{self.kind} encoder expects {INPUT_DIMS[self.kind]} values per row, got {flat.shape}")
        return self.mlp(flat)


def flatten_egomotion(seq: List[Union[Homography, PoseSE3]], kind: EgomotionKind) -> np.ndarray:
    if not seq:
        raise EmptySequence("egomotion sequence is empty")
    expected = Homography if kind == "homography" else PoseSE3
    if any(not isinstance(m, expected) for m in seq):
        raise ShapeMismatch(f"{kind} encoding needs {expected.__name__} items")
    return np.stack([m.flatten() for m in seq])


def encode_egomotion(
    encoder: EgomotionEncoder,
    seq: List[Union[Homography, PoseSE3]],
    kind: EgomotionKind = "homography",
) -> EgomotionFeatures:
    flat = flatten_egomotion(seq, kind).astype(encoder.mlp.fc1.weight.dtype)
    return EgomotionFeatures(F=encoder(Tensor(flat)), kind="concatenated")


def egomotion_inputs(sequence, mode: str, n_rows: int) -> np.ndarray:
    """
    (n_rows × 9|12) encoder input for an egomotion mode:

    - homography: M_t per frame
    - se3: pose of frame t relative to frame 0
    - constant-last: past M_t, then the last past M_t over the future rows
    - none: zeros (the encoder is bypassed downstream)
    """
    if n_rows < 1:
        raise EmptySequence("egomotion input needs at least one row")
    if mode == "homography":
        return flatten_egomotion(sequence.homographies[:n_rows], "homography")
    if mode == "se3":
        origin = sequence.poses[0].inverse()
        return flatten_egomotion([origin.compose(p) for p in sequence.poses[:n_rows]], "se3")
    if mode == "constant-last":
        n_past = sequence.n_past
        past = flatten_egomotion(sequence.homographies[:min(n_past, n_rows)], "homography")
        if n_rows <= n_past:
            return past
        return np.concatenate([past, np.repeat(past[-1:], n_rows - n_past, axis=0)], axis=0)
    if mode == "none":
        return np.zeros((n_rows, INPUT_DIMS["homography"]))
    raise ValueError(f"unknown egomotion mode {mode!r}")
