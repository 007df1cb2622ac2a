from dataclasses import dataclass
from typing import List

import numpy as np

from src.errors import InvalidK, InvalidT

SQRT_OFFSET = 1e-4
LINEAR_BETA_RANGE = (1e-4, 2e-2)


@dataclass(frozen=True)
class Schedule:
    T: int
    kind: str
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bar: np.ndarray

    def check_step(self, t) -> np.ndarray:
        steps = np.asarray(t)
        if steps.dtype.kind not in "iu" or np.any(steps < 0) or np.any(steps >= self.T):
            raise InvalidT(f"diffusion step {t!r} outside [0, {self.T})")
        return steps

    def alpha_bar_prev(self, t: int) -> float:
        return 1.0 if t < 0 else float(self.alpha_bar[t])


def make_schedule(T: int, kind: str = "sqrt") -> Schedule:
    """
    sqrt:   alpha_bar_t = 1 - sqrt((t+1) / (T+s)), betas from consecutive ratios
    linear: betas evenly spaced in [1e-4, 2e-2]
    """
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise InvalidT(f"T must be a positive integer, got {T!r}")
    if kind == "sqrt":
        t = np.arange(T, dtype=np.float64)
        alpha_bar = 1.0 - np.sqrt((t + 1.0) / (T + SQRT_OFFSET))
        prev = np.concatenate([[1.0], alpha_bar[:-1]])
        betas = 1.0 - alpha_bar / prev
    elif kind == "linear":
        lo, hi = LINEAR_BETA_RANGE
        betas = np.linspace(lo, hi, T) if T > 1 else np.array([lo])
        alpha_bar = np.cumprod(1.0 - betas)
    else:
        raise InvalidT(f"unknown schedule kind {kind!r}")
    alphas = 1.0 - betas
    return Schedule(T=int(T), kind=kind, betas=betas, alphas=alphas, alpha_bar=alpha_bar)


def respace_steps(T: int, K: int) -> List[int]:
    """K evenly spaced step indices from T-1 down to 0, endpoints included."""
    if not isinstance(K, (int, np.integer)) or not 1 <= K <= T:
        raise InvalidK(f"K={K!r} must satisfy 1 ≤ K ≤ T={T}")
    if K == 1:
        return [T - 1]
    steps = np.round(np.linspace(T - 1, 0, K)).astype(int)
    return [int(s) for s in steps]
