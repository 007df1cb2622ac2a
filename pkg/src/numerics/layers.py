import logging
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.numerics import ops
from src.numerics.tensor import Parameter, Tensor

logger = logging.getLogger(__name__)


class Module:
    """
    Base container. Parameters are discovered in attribute order and named
    by their dotted path, e.g. `hmtm.blocks.0.in_proj.weight`.
    """

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for key, value in vars(self).items():
            name = f"{prefix}{key}"
            if isinstance(value, Parameter):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{name}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")
                    elif isinstance(item, Parameter):
                        yield f"{name}.{i}", item

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray], strict: bool = True) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if strict and (missing or unexpected):
            raise KeyError(f"state dict mismatch | missing={missing[:5]} | unexpected={unexpected[:5]}")
        for name, p in own.items():
            if name not in state:
                continue
            value = np.asarray(state[name])
            if value.shape != p.shape:
                raise ValueError(f"shape mismatch for {name}: {value.shape} vs {p.shape}")
            p.data = value.astype(p.dtype, copy=True)

    def num_parameters(self) -> int:
        return int(sum(p.data.size for p in self.parameters()))

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


def _uniform(rng: np.random.Generator, bound: float, shape, dtype) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True, dtype=np.float64):
        bound = 1.0 / np.sqrt(d_in)
        self.weight = Parameter(_uniform(rng, bound, (d_in, d_out), dtype))
        self.bias = Parameter(_uniform(rng, bound, (d_out,), dtype)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return ops.affine_map(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, d: int, eps: float = 1e-5, dtype=np.float64):
        self.gamma = Parameter(np.ones(d, dtype=dtype))
        self.beta = Parameter(np.zeros(d, dtype=dtype))
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gamma, self.beta, self.eps)


class Conv3d(Module):
    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int,
        stride: int,
        padding: int,
        rng: np.random.Generator,
        bias: bool = True,
        dtype=np.float64,
    ):
        bound = 1.0 / np.sqrt(c_in * kernel ** 3)
        self.weight = Parameter(_uniform(rng, bound, (c_out, c_in, kernel, kernel, kernel), dtype))
        self.bias = Parameter(_uniform(rng, bound, (c_out,), dtype)) if bias else None
        self.stride = stride
        self.padding = padding

    def forward(self, grid: Tensor) -> Tensor:
        return ops.conv3d(grid, self.weight, self.bias, stride=self.stride, padding=self.padding)


class MLP(Module):
    """Two-layer perceptron with SiLU, applied row-wise."""

    def __init__(self, d_in: int, d_hidden: int, d_out: int, rng: np.random.Generator, dtype=np.float64):
        self.fc1 = Linear(d_in, d_hidden, rng, dtype=dtype)
        self.fc2 = Linear(d_hidden, d_out, rng, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        return self.fc2(ops.silu(self.fc1(x)))


class MultiHeadAttention(Module):
    def __init__(self, d: int, n_head: int, rng: np.random.Generator, dtype=np.float64):
        self.n_head = n_head
        self.q_proj = Linear(d, d, rng, dtype=dtype)
        self.k_proj = Linear(d, d, rng, dtype=dtype)
        self.v_proj = Linear(d, d, rng, dtype=dtype)
        self.o_proj = Linear(d, d, rng, dtype=dtype)
        self.last_weights: Optional[np.ndarray] = None

    def forward(self, q: Tensor, k: Tensor, v: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
        out, weights = ops.multi_head_attention(
            q, k, v,
            n_head=self.n_head,
            projections=[
                (self.q_proj.weight, self.q_proj.bias),
                (self.k_proj.weight, self.k_proj.bias),
                (self.v_proj.weight, self.v_proj.bias),
                (self.o_proj.weight, self.o_proj.bias),
            ],
            mask=mask,
        )
        self.last_weights = weights
        return out


def sinusoidal_encoding(positions: np.ndarray, dim: int, max_period: float = 10000.0) -> np.ndarray:
    """(len(positions), dim) table of sin/cos features; odd dims get a zero last column."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1)
    half = dim // 2
    freqs = np.exp(-np.log(max_period) * np.arange(half) / max(half, 1))
    args = positions[:, None] * freqs[None, :]
    table = np.concatenate([np.sin(args), np.cos(args)], axis=1)
    if dim % 2:
        table = np.concatenate([table, np.zeros((len(positions), 1))], axis=1)
    return table
