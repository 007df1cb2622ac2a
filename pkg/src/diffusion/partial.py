from dataclasses import dataclass

import numpy as np

from src.diffusion.schedule import Schedule
from src.errors import ShapeMismatch
from src.numerics import Tensor, as_tensor, ops


@dataclass
class LatentSeq:
    """(…, N_p+N_f, f) latents whose first `anchor_len` rows are the conditioning past."""

    z: Tensor
    anchor_len: int

    def __post_init__(self):
        self.z = as_tensor(self.z)
        if not 0 <= self.anchor_len <= self.z.shape[-2]:
            raise ShapeMismatch(f"anchor_len {self.anchor_len} outside [0, {self.z.shape[-2]}]")

    def past(self) -> Tensor:
        return self.z[..., :self.anchor_len, :]

    def future(self) -> Tensor:
        return self.z[..., self.anchor_len:, :]

    @property
    def n_future(self) -> int:
        return self.z.shape[-2] - self.anchor_len

    def with_future(self, future: Tensor) -> "LatentSeq":
        """Re-anchors: past rows are taken verbatim from this sequence."""
        return LatentSeq(z=ops.concat([self.past(), as_tensor(future)], axis=-2), anchor_len=self.anchor_len)


def _step_coefficient(values: np.ndarray, steps: np.ndarray, z: Tensor) -> np.ndarray:
    # one coefficient per batch element, broadcast over rows and channels
    c = values[steps].astype(z.dtype)
    if steps.ndim == 0:
        return c
    return c.reshape(steps.shape + (1,) * (z.ndim - steps.ndim))


def q_sample_partial(z0: LatentSeq, t, noise, schedule: Schedule) -> LatentSeq:
    """
    Forward noising of the future rows only:

        future ← sqrt(alpha_bar_t)·z0_future + sqrt(1 - alpha_bar_t)·noise

    `t` is a step index or one index per batch element.
    """
    steps = schedule.check_step(t)
    future = z0.future()
    noise = as_tensor(noise, dtype=future.dtype)
    if noise.shape != future.shape:
        raise ShapeMismatch(f"noise {noise.shape} does not match future rows {future.shape}")
    if steps.ndim > 0 and (future.ndim < 3 or steps.shape[0] != future.shape[0]):
        raise ShapeMismatch(f"{steps.shape[0]} steps for latents of shape {future.shape}")
    a = _step_coefficient(np.sqrt(schedule.alpha_bar), steps, future)
    s = _step_coefficient(np.sqrt(1.0 - schedule.alpha_bar), steps, future)
    noised = ops.add(ops.mul(future, a), ops.mul(noise, s))
    return z0.with_future(noised)
