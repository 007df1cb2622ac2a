import logging
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from src.diffusion.partial import LatentSeq
from src.diffusion.schedule import Schedule, make_schedule, respace_steps
from src.errors import ShapeMismatch
from src.numerics import Tensor, as_tensor, no_grad

logger = logging.getLogger(__name__)

Denoise = Callable[[Tensor, int], Tensor]
StepHook = Callable[[int, LatentSeq], None]
SeedLike = Union[int, Sequence[int]]


def posterior_step(x_t: np.ndarray, x0: np.ndarray, t: int, t_prev: int, schedule: Schedule,
                   noise: np.ndarray) -> np.ndarray:
    """DDPM posterior q(x_{t_prev} | x_t, x0) between two respaced steps, sampled with `noise`."""
    ab_t = schedule.alpha_bar[t]
    ab_prev = schedule.alpha_bar_prev(t_prev)
    beta = 1.0 - ab_t / ab_prev
    coef_x0 = np.sqrt(ab_prev) * beta / (1.0 - ab_t)
    coef_xt = np.sqrt(1.0 - beta) * (1.0 - ab_prev) / (1.0 - ab_t)
    var = beta * (1.0 - ab_prev) / (1.0 - ab_t)
    out = coef_x0 * x0 + coef_xt * x_t + np.sqrt(max(var, 0.0)) * noise
    return out.astype(x_t.dtype)


def reverse_partial(
    denoise: Denoise,
    past,
    n_future: int,
    schedule: Schedule,
    steps: List[int],
    seed: SeedLike,
    on_step: Optional[StepHook] = None,
) -> np.ndarray:
    """
    Partial denoising: the future rows start from N(0, I) and walk through
    `steps`; the past rows are concatenated back verbatim before every
    model call. Returns the final future rows.
    """
    past = as_tensor(past)
    if past.ndim < 2:
        raise ShapeMismatch(f"past latents must be (…, N_p, f), got {past.shape}")
    rng = np.random.default_rng(seed)
    *lead, n_past, f = past.shape
    x = rng.standard_normal((*lead, n_future, f)).astype(past.dtype)

    with no_grad():
        for i, t in enumerate(steps):
            z = LatentSeq(z=past, anchor_len=n_past).with_future(Tensor(x))
            if on_step is not None:
                on_step(i, z)
            x0 = np.asarray(denoise(z.z, t).data)[..., n_past:, :]
            if x0.shape != x.shape:
                raise ShapeMismatch(f"denoiser returned future rows {x0.shape}, expected {x.shape}")
            if i == len(steps) - 1:
                x = x0.astype(past.dtype)
            else:
                noise = rng.standard_normal(x.shape).astype(past.dtype)
                x = posterior_step(x, x0, t, steps[i + 1], schedule, noise)
    return x


def sample_egomotion(
    vm: Denoise,
    F_ego_p,
    n_future: int,
    seed: SeedLike,
    schedule: Optional[Schedule] = None,
    k: int = 1,
    on_step: Optional[StepHook] = None,
) -> np.ndarray:
    """Future egomotion latents (…, N_f, f); one x0-prediction pass at the default k=1."""
    schedule = schedule or make_schedule(1000)
    steps = respace_steps(schedule.T, k)
    return reverse_partial(vm, F_ego_p, n_future, schedule, steps, seed, on_step)


def sample_htp(
    hmtm,
    F_htp_p,
    ego_pf,
    x_vox,
    n_future: int,
    k: int,
    seed: SeedLike,
    schedule: Optional[Schedule] = None,
    on_step: Optional[StepHook] = None,
) -> np.ndarray:
    """Future HTP latents conditioned on the full past+future egomotion features and voxel patches."""
    schedule = schedule or make_schedule(1000)
    F_htp_p = as_tensor(F_htp_p)
    n_past = F_htp_p.shape[-2]
    ego_pf = as_tensor(ego_pf, dtype=F_htp_p.dtype)
    if ego_pf.shape[-2] != n_past + n_future:
        raise ShapeMismatch(f"egomotion condition has {ego_pf.shape[-2]} rows, expected {n_past + n_future}")
    steps = respace_steps(schedule.T, k)
    logger.debug("HTP sampling | steps=%d | n_past=%d | n_future=%d", len(steps), n_past, n_future)

    def denoise(z: Tensor, t: int) -> Tensor:
        return hmtm(z, t, ego_pf, x_vox, n_past)

    return reverse_partial(denoise, F_htp_p, n_future, schedule, steps, seed, on_step)
