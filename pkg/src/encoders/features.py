from dataclasses import dataclass
from typing import Literal

from src.numerics import Tensor

FeatureKind = Literal["past", "future", "concatenated"]


@dataclass
class EgomotionFeatures:
    F: Tensor
    kind: FeatureKind = "concatenated"

    @property
    def rows(self) -> int:
        return self.F.shape[-2]


@dataclass
class VisionFeatures:
    """X_sem with N_p + L rows; L is N_f in training and 0 at inference."""

    X: Tensor
    n_past: int
    L: int

    def __post_init__(self):
        if self.X.shape[-2] != self.n_past + self.L:
            raise ValueError(f"X_sem has {self.X.shape[-2]} rows, expected N_p+L={self.n_past + self.L}")


@dataclass
class HTPLatents:
    F: Tensor
    anchor_len: int

    def __post_init__(self):
        if self.anchor_len > self.F.shape[-2]:
            raise ValueError(f"anchor_len {self.anchor_len} exceeds {self.F.shape[-2]} rows")

    def past(self) -> Tensor:
        return self.F[..., :self.anchor_len, :]

    def future(self) -> Tensor:
        return self.F[..., self.anchor_len:, :]


@dataclass
class VoxelPatches:
    X: Tensor

    @property
    def n_vox(self) -> int:
        return self.X.shape[-2]
