from typing import Optional

import numpy as np

from src.denoisers.embedding import DiffusionStepEmbedding
from src.errors import ShapeMismatch
from src.numerics import (
    LayerNorm,
    Linear,
    Module,
    Parameter,
    ScanParams,
    Tensor,
    as_tensor,
    init_state_matrix,
    ops,
    selective_scan,
)


DT_MIN, DT_MAX = 1e-3, 1e-1


class MambaBlock(Module):
    """
    Pre-norm Mamba block over a (…, N, f) latent sequence.

    With `conditioned=True` (EAM) the per-step scan parameters (Δ, B, C)
    are computed from the scan branch plus a projection of the egomotion
    row at the same step. `ego_proj` is created last so an unconditioned
    block built from the same rng state shares every other weight.
    """

    def __init__(
        self,
        f: int,
        rng: np.random.Generator,
        d_state: int = 16,
        d_conv: int = 2,
        expand: int = 1,
        conditioned: bool = False,
        dtype=np.float64,
    ):
        d_inner = expand * f
        self.f = f
        self.d_inner = d_inner
        self.d_state = d_state
        self.d_conv = d_conv
        self.expand = expand
        self.conditioned = conditioned

        self.norm = LayerNorm(f, dtype=dtype)
        self.in_proj = Linear(f, 2 * d_inner, rng, dtype=dtype)
        bound = 1.0 / np.sqrt(d_conv)
        self.conv_weight = Parameter(rng.uniform(-bound, bound, (d_conv, d_inner)).astype(dtype))
        self.conv_bias = Parameter(rng.uniform(-bound, bound, d_inner).astype(dtype))
        self.dt_proj = Linear(d_inner, d_inner, rng, dtype=dtype)
        dt = np.exp(rng.uniform(np.log(DT_MIN), np.log(DT_MAX), d_inner))
        self.dt_proj.bias.data = (dt + np.log(-np.expm1(-dt))).astype(dtype)
        self.B_proj = Linear(d_inner, d_state, rng, dtype=dtype)
        self.C_proj = Linear(d_inner, d_state, rng, dtype=dtype)
        self.A_log = Parameter(np.log(-init_state_matrix(d_inner, d_state)).astype(dtype))
        self.D = Parameter(np.ones(d_inner, dtype=dtype))
        self.out_proj = Linear(d_inner, f, rng, dtype=dtype)
        if conditioned:
            self.ego_proj = Linear(f, d_inner, rng, dtype=dtype)

    def causal_conv(self, u: Tensor) -> Tensor:
        """Depthwise conv of width d_conv over time; row t sees rows t-d_conv+1 … t."""
        out = ops.add(ops.mul(u, self.conv_weight[0]), self.conv_bias)
        for j in range(1, self.d_conv):
            out = ops.add(out, ops.mul(ops.shift_rows(u, j), self.conv_weight[j]))
        return out

    def scan_params(self, s: Tensor) -> ScanParams:
        return ScanParams(
            A=ops.mul(ops.exp(self.A_log), -1.0),
            B=self.B_proj(s),
            C=self.C_proj(s),
            delta=ops.softplus(self.dt_proj(s)),
            d_conv=self.d_conv,
            expand=self.expand,
            d_state=self.d_state,
        )

    def forward(self, z: Tensor, t_embed: Tensor, ego: Optional[Tensor] = None) -> Tensor:
        z = as_tensor(z)
        if z.shape[-1] != self.f:
            raise ShapeMismatch(f"latent width {z.shape[-1]} != model dim {self.f}")
        h = ops.add(z, t_embed)
        xz = self.in_proj(self.norm(h))
        u = ops.silu(self.causal_conv(xz[..., :self.d_inner]))
        gate = xz[..., self.d_inner:]

        s = u
        if self.conditioned:
            if ego is None:
                raise ShapeMismatch("egomotion-aware block needs egomotion features")
            ego = as_tensor(ego)
            if ego.shape[-2] != z.shape[-2] or ego.shape[-1] != self.f:
                raise ShapeMismatch(f"egomotion features {ego.shape} do not match latents {z.shape}")
            s = ops.add(u, self.ego_proj(ego))

        y = selective_scan(u, self.scan_params(s))
        y = ops.add(y, ops.mul(u, self.D))
        y = ops.mul(y, ops.silu(gate))
        return ops.add(z, self.out_proj(y))


def vm_forward(block: MambaBlock, z: Tensor, t_embed: Tensor) -> Tensor:
    return block(z, t_embed)


def eam_forward(block: MambaBlock, z: Tensor, ego: Tensor, t_embed: Tensor) -> Tensor:
    return block(z, t_embed, ego=ego)


class VanillaMambaDenoiser(Module):
    """Egomotion-diffusion denoiser: a stack of unconditioned Mamba blocks with an x0 head."""

    def __init__(self, f: int, rng: np.random.Generator, n_layers: int = 1, d_state: int = 16,
                 d_conv: int = 2, expand: int = 1, dtype=np.float64):
        self.f = f
        self.step_embedding = DiffusionStepEmbedding(f, rng, dtype=dtype)
        self.blocks = [
            MambaBlock(f, rng, d_state=d_state, d_conv=d_conv, expand=expand, dtype=dtype)
            for _ in range(n_layers)
        ]
        self.out = Linear(f, f, rng, dtype=dtype)

    def forward(self, z: Tensor, t) -> Tensor:
        t_embed = self.step_embedding(t)
        h = as_tensor(z)
        for block in self.blocks:
            h = vm_forward(block, h, t_embed)
        return self.out(h)
