import logging
from typing import Dict, Iterable, List, Tuple

import numpy as np

from src.numerics.tensor import Parameter

logger = logging.getLogger(__name__)


class AdamW:
    """
    Adam with decoupled weight decay. Parameters are updated in sorted-name
    order so a run is reproducible regardless of module construction order.
    """

    def __init__(
        self,
        named_params: Iterable[Tuple[str, Parameter]],
        lr: float = 5e-5,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ):
        self.params: List[Tuple[str, Parameter]] = sorted(named_params, key=lambda kv: kv[0])
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m: Dict[str, np.ndarray] = {n: np.zeros_like(p.data) for n, p in self.params}
        self.v: Dict[str, np.ndarray] = {n: np.zeros_like(p.data) for n, p in self.params}

    def zero_grad(self) -> None:
        for _, p in self.params:
            p.grad = None

    def step(self) -> None:
        self.step_count += 1
        bc1 = 1.0 - self.beta1 ** self.step_count
        bc2 = 1.0 - self.beta2 ** self.step_count
        for name, p in self.params:
            if p.grad is None:
                continue
            g = p.grad.astype(p.dtype, copy=False)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            if self.weight_decay:
                p.data *= (1.0 - self.lr * self.weight_decay)
            p.data -= (self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)).astype(p.dtype)

    def state_dict(self) -> Dict[str, np.ndarray]:
        state = {"step": np.array(self.step_count, dtype=np.int64)}
        for name, _ in self.params:
            state[f"m/{name}"] = self.m[name].copy()
            state[f"v/{name}"] = self.v[name].copy()
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        self.step_count = int(state["step"])
        for name, p in self.params:
            self.m[name] = np.asarray(state[f"m/{name}"], dtype=p.dtype).copy()
            self.v[name] = np.asarray(state[f"v/{name}"], dtype=p.dtype).copy()
        logger.debug("Optimizer state restored | step=%d | params=%d", self.step_count, len(self.params))


def clip_grad_norm(params: Iterable[Parameter], max_norm: float) -> float:
    """Scales gradients in place so their global L2 norm is at most `max_norm`."""
    params = [p for p in params if p.grad is not None]
    total = float(np.sqrt(sum(float((p.grad.astype(np.float64) ** 2).sum()) for p in params)))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for p in params:
            p.grad = p.grad * scale
    return total
