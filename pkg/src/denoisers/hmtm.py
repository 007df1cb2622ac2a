import logging
from typing import List, Optional, Union

import numpy as np

from src.config import ModelConfig
from src.denoisers.embedding import DiffusionStepEmbedding
from src.denoisers.mamba import MambaBlock, eam_forward
from src.denoisers.pattern import HybridPattern
from src.denoisers.sat import SATBlock, sat_forward
from src.errors import ShapeMismatch
from src.numerics import Linear, Module, Tensor, as_tensor

logger = logging.getLogger(__name__)


class HMTMDenoiser(Module):
    """Hybrid Mamba-Transformer denoiser of the HTP diffusion; blocks run in pattern order."""

    def __init__(
        self,
        f: int,
        pattern: Union[str, HybridPattern],
        rng: np.random.Generator,
        d_state: int = 16,
        d_conv: int = 2,
        expand: int = 1,
        n_head: int = 4,
        d_ffn: int = 2048,
        dtype=np.float64,
    ):
        self.f = f
        self.pattern = pattern if isinstance(pattern, HybridPattern) else HybridPattern.parse(pattern)
        self.step_embedding = DiffusionStepEmbedding(f, rng, dtype=dtype)
        self.blocks: List[Module] = []
        for tag in self.pattern.blocks:
            if tag == "EAM":
                self.blocks.append(MambaBlock(f, rng, d_state, d_conv, expand, conditioned=True, dtype=dtype))
            else:
                self.blocks.append(SATBlock(f, rng, n_head=n_head, d_ffn=d_ffn, dtype=dtype))
        self.out = Linear(f, f, rng, dtype=dtype)
        logger.debug("HMTM built | pattern=%s | params=%d", self.pattern, self.num_parameters())

    @classmethod
    def from_config(cls, model: ModelConfig, rng: np.random.Generator, dtype=np.float64) -> "HMTMDenoiser":
        return cls(
            model.f,
            model.pattern,
            rng,
            d_state=model.eam.d_state,
            d_conv=model.eam.d_conv,
            expand=model.eam.expand,
            n_head=model.sat.n_head,
            d_ffn=model.sat.d_ffn,
            dtype=dtype,
        )

    def forward(self, z: Tensor, t, ego: Tensor, x_vox: Optional[Tensor] = None, n_past: int = 1) -> Tensor:
        z = as_tensor(z)
        if ego is not None and as_tensor(ego).shape[-2] != z.shape[-2]:
            raise ShapeMismatch(f"egomotion rows {as_tensor(ego).shape[-2]} != latent rows {z.shape[-2]}")
        t_embed = self.step_embedding(t)
        h = z
        for tag, block in zip(self.pattern.blocks, self.blocks):
            if tag == "EAM":
                h = eam_forward(block, h, ego, t_embed)
            else:
                h = sat_forward(block, h, x_vox, t_embed, n_past=n_past)
        return self.out(h)


def hmtm_forward(
    model: HMTMDenoiser,
    z: Tensor,
    ego: Tensor,
    x_vox: Optional[Tensor],
    t,
    n_past: int = 1,
) -> Tensor:
    """x0-prediction of the full (N_p+N_f)×f HTP latent sequence."""
    return model(z, t, ego, x_vox, n_past)
