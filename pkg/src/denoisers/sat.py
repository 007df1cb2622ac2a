from typing import Optional

import numpy as np

from src.errors import ShapeMismatch
from src.numerics import MLP, LayerNorm, Module, MultiHeadAttention, Tensor, as_tensor, ops, sinusoidal_encoding


def time_positions(n_rows: int, n_past: int) -> np.ndarray:
    """Frame indices -N_p+1 … N_f, so the last observed frame sits at 0."""
    return np.arange(n_rows) - (n_past - 1)


class SATBlock(Module):
    """
    Structure-aware Transformer block (post-norm):

        h = z + t_embed + PE
        h = LN1(h + MHSA(h))
        h = LN2(h + MHCA(h, X_vox))      # MHSA again when X_vox is absent
        h = LN3(h + FFN(h))
    """

    def __init__(self, f: int, rng: np.random.Generator, n_head: int = 4, d_ffn: int = 2048, dtype=np.float64):
        if f % n_head != 0:
            raise ShapeMismatch(f"model dim {f} not divisible by n_head={n_head}")
        self.f = f
        self.self_attn = MultiHeadAttention(f, n_head, rng, dtype=dtype)
        self.norm1 = LayerNorm(f, dtype=dtype)
        self.cross_attn = MultiHeadAttention(f, n_head, rng, dtype=dtype)
        self.norm2 = LayerNorm(f, dtype=dtype)
        self.ffn = MLP(f, d_ffn, f, rng, dtype=dtype)
        self.norm3 = LayerNorm(f, dtype=dtype)

    def forward(self, z: Tensor, t_embed: Tensor, x_vox: Optional[Tensor] = None, n_past: int = 1) -> Tensor:
        z = as_tensor(z)
        if z.ndim < 2 or z.shape[-2] == 0:
            raise ShapeMismatch(f"SAT needs a nonempty latent sequence, got {z.shape}")
        if z.shape[-1] != self.f:
            raise ShapeMismatch(f"latent width {z.shape[-1]} != model dim {self.f}")
        pe = sinusoidal_encoding(time_positions(z.shape[-2], n_past), self.f).astype(z.dtype)
        h = ops.add(ops.add(z, t_embed), pe)

        h = self.norm1(ops.add(h, self.self_attn(h, h, h)))
        if x_vox is None:
            h = self.norm2(ops.add(h, self.cross_attn(h, h, h)))
        else:
            x_vox = as_tensor(x_vox)
            if x_vox.shape[-1] != self.f:
                raise ShapeMismatch(f"voxel patches width {x_vox.shape[-1]} != model dim {self.f}")
            h = self.norm2(ops.add(h, self.cross_attn(h, x_vox, x_vox)))
        return self.norm3(ops.add(h, self.ffn(h)))


def sat_forward(block: SATBlock, z: Tensor, x_vox: Optional[Tensor], t_embed: Tensor, n_past: int = 1) -> Tensor:
    return block(z, t_embed, x_vox=x_vox, n_past=n_past)
