import logging
from typing import Optional

import numpy as np

from src.config import RunConfig
from src.data.examples import Example
from src.denoisers import HMTMDenoiser, VanillaMambaDenoiser
from src.diffusion.sampling import sample_egomotion, sample_htp
from src.diffusion.schedule import make_schedule
from src.encoders import (
    EgomotionEncoder,
    FusionModule,
    TrajectoryDecoder,
    VisionFeatures,
    VoxelEncoder,
    decode_trajectory,
    encode_voxels,
    fuse_htp,
    input_kind,
)
from src.geometry import OccupancyGrid
from src.numerics import Module, Tensor, no_grad, ops

logger = logging.getLogger(__name__)

DIFFUSED_EGOMOTION = ("homography", "se3")


class TwinModel(Module):
    """
    Every learnable part of the engine. The egomotion diffusion (VM) exists
    only for the homography and se3 modes; without point clouds there is no
    voxel encoder and SAT falls back to self-attention.
    """

    def __init__(self, cfg: RunConfig, seed: Optional[int] = None):
        self.cfg = cfg
        self.dtype = np.dtype(cfg.train.dtype)
        self.mode = cfg.egomotion_mode
        self.schedule = make_schedule(cfg.schedule.T, cfg.schedule.kind)
        rng = np.random.default_rng(cfg.train.seed if seed is None else seed)
        m = cfg.model

        self.ego_encoder = (
            EgomotionEncoder(m.f, input_kind(self.mode), rng, dtype=self.dtype) if self.mode != "none" else None
        )
        self.fusion = FusionModule(m.f, m.x, rng, dtype=self.dtype)
        self.voxel_encoder = (
            VoxelEncoder(m.f, rng, hidden=m.voxel_hidden, dims=tuple(m.voxel_dims), dtype=self.dtype)
            if cfg.modalities.point_clouds else None
        )
        self.decoder = TrajectoryDecoder(m.f, rng, dtype=self.dtype)
        self.vm = (
            VanillaMambaDenoiser(
                m.f, rng, n_layers=m.vm_layers, d_state=m.eam.d_state, d_conv=m.eam.d_conv,
                expand=m.eam.expand, dtype=self.dtype,
            )
            if self.uses_egomotion_diffusion else None
        )
        self.hmtm = HMTMDenoiser.from_config(m, rng, dtype=self.dtype)
        logger.info(
            "TwinModel built | mode=%s | pattern=%s | f=%d | params=%d",
            self.mode, m.pattern, m.f, self.num_parameters(),
        )

    @property
    def uses_egomotion_diffusion(self) -> bool:
        return self.mode in DIFFUSED_EGOMOTION

    # ----------------- ENCODING -----------------
    def egomotion_features(self, ego_input) -> Tensor:
        """(…, rows, f) egomotion features; zeros in mode `none`."""
        ego_input = np.asarray(ego_input, dtype=self.dtype)
        if self.ego_encoder is None:
            return Tensor(np.zeros(ego_input.shape[:-1] + (self.cfg.model.f,), dtype=self.dtype))
        return self.ego_encoder(Tensor(ego_input))

    def voxel_patches(self, grid: Optional[OccupancyGrid]) -> Optional[Tensor]:
        if self.voxel_encoder is None or grid is None:
            return None
        return encode_voxels(self.voxel_encoder, grid).X

    def voxel_patches_batch(self, grids) -> Optional[Tensor]:
        if self.voxel_encoder is None or any(g is None for g in grids):
            return None
        volume = np.stack([g.as_volume().astype(self.dtype)[None] for g in grids])
        return self.voxel_encoder(Tensor(volume))

    # ----------------- INFERENCE -----------------
    def predict(self, example: Example, seed: int = 0) -> np.ndarray:
        """Samples future egomotion, then the future hand latents, and decodes them to (N_f, 3) global waypoints."""
        n_past, n_future = example.n_past, example.n_future
        sched = self.cfg.schedule
        with no_grad():
            F_ego = self.egomotion_features(example.ego_input)
            if self.uses_egomotion_diffusion:
                past = F_ego[:n_past]
                future = sample_egomotion(self.vm, past, n_future, seed=[seed, 0], schedule=self.schedule,
                                          k=sched.k_ego)
                ego_pf = ops.concat([past, Tensor(future)], axis=0)
            else:
                ego_pf = F_ego[:n_past + n_future]

            X_sem = VisionFeatures(X=Tensor(example.x_sem[:n_past]), n_past=n_past, L=0)
            F_htp_p = fuse_htp(self.fusion, example.past_waypoints, X_sem).F
            x_vox = self.voxel_patches(example.grid)
            future = sample_htp(
                self.hmtm, F_htp_p, ego_pf, x_vox, n_future, k=sched.k_htp, seed=[seed, 1], schedule=self.schedule,
            )
            return decode_trajectory(self.decoder, Tensor(future))
