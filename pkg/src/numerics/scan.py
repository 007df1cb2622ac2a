from dataclasses import dataclass

import numpy as np

from src.errors import NonPositiveDelta, ShapeMismatch
from src.numerics import ops
from src.numerics.tensor import Tensor, as_tensor

DEFAULT_D_STATE = 16
DEFAULT_D_CONV = 2
DEFAULT_EXPAND = 1


@dataclass
class ScanParams:
    """Per-call parameters of one selective scan over a T×d_inner input."""

    A: Tensor
    B: Tensor
    C: Tensor
    delta: Tensor
    d_conv: int = DEFAULT_D_CONV
    expand: int = DEFAULT_EXPAND
    d_state: int = DEFAULT_D_STATE

    def __post_init__(self):
        self.A, self.B, self.C, self.delta = (as_tensor(v) for v in (self.A, self.B, self.C, self.delta))
        if self.A.shape[-1] != self.d_state:
            raise ShapeMismatch(f"A has {self.A.shape[-1]} state columns, d_state={self.d_state}")
        if np.any(self.delta.data <= 0):
            raise NonPositiveDelta("delta must be positive everywhere")


def init_state_matrix(d_inner: int, d_state: int, dtype=np.float64) -> np.ndarray:
    """Negative-real diagonal parameterization: A[i, s] = -(s + 1), so exp(Δ·A) ∈ (0, 1)."""
    return -np.tile(np.arange(1, d_state + 1, dtype=dtype), (d_inner, 1))


def selective_scan(x: Tensor, params: ScanParams) -> Tensor:
    return ops.selective_scan(x, params.delta, params.A, params.B, params.C)
