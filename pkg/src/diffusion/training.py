import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.config import LossWeights, RunConfig, config_hash, settings
from src.data.examples import Example
from src.diffusion.losses import LossBundle, compute_losses
from src.diffusion.model import TwinModel
from src.diffusion.partial import LatentSeq, q_sample_partial
from src.errors import CheckpointMismatch, ShapeMismatch
from src.numerics import AdamW, Tensor, clip_grad_norm, load_checkpoint, ops, save_checkpoint
from src.presentation.report_csv import LOSS_COLUMNS, append_csv_row, truncate_after_epoch

logger = logging.getLogger(__name__)

LATEST = "latest.npz"


def _stack(batch: Sequence[Example], attr: str, dtype) -> np.ndarray:
    return np.stack([np.asarray(getattr(ex, attr), dtype=dtype) for ex in batch])


def train_step(
    model: TwinModel,
    batch: Sequence[Example],
    optimizer: AdamW,
    weights: Optional[LossWeights] = None,
    seed=0,
    grad_clip: float = 1.0,
) -> LossBundle:
    """
    One joint update of both diffusions on a batch: a uniform step per
    element, partial noising of both latent streams, both denoisers, the
    loss bundle, clipping and an AdamW step.
    """
    if not batch:
        raise ShapeMismatch("empty training batch")
    n_past, n_future = batch[0].n_past, batch[0].n_future
    if any(ex.n_past != n_past or ex.n_future != n_future for ex in batch):
        raise ShapeMismatch("all sequences of a batch must share N_p and N_f")

    rng = np.random.default_rng(seed)
    schedule = model.schedule
    dtype = model.dtype
    f = model.cfg.model.f
    B = len(batch)
    t = rng.integers(0, schedule.T, size=B)

    # egomotion stream
    F_ego = model.egomotion_features(_stack(batch, "ego_input", dtype))
    ego_pred = ego_target = None
    if model.uses_egomotion_diffusion:
        ego0 = LatentSeq(z=F_ego, anchor_len=n_past)
        noise = rng.standard_normal((B, n_future, f)).astype(dtype)
        ego_t = q_sample_partial(ego0, t, noise, schedule)
        ego_pred = model.vm(ego_t.z, t)[..., n_past:, :]
        ego_target = ego0.future()
        ego_cond = ops.concat([ego0.past(), ego_pred], axis=-2)
    else:
        ego_cond = F_ego

    # HTP stream
    F_htp = model.fusion(Tensor(_stack(batch, "waypoints", dtype)), Tensor(_stack(batch, "x_sem", dtype)))
    htp0 = LatentSeq(z=F_htp, anchor_len=n_past)
    noise = rng.standard_normal((B, n_future, f)).astype(dtype)
    htp_t = q_sample_partial(htp0, t, noise, schedule)
    x_vox = model.voxel_patches_batch([ex.grid for ex in batch])
    htp_pred = model.hmtm(htp_t.z, t, ego_cond, x_vox, n_past)[..., n_past:, :]
    decoded = model.decoder(htp_pred)

    # final reverse step
    t0 = np.zeros(B, dtype=np.int64)
    htp_last = q_sample_partial(htp0, t0, noise, schedule)
    reg_pred = model.hmtm(htp_last.z, t0, ego_cond, x_vox, n_past)[..., n_past:, :]

    gt = np.stack([ex.future_waypoints for ex in batch]).astype(dtype)
    losses = compute_losses(
        htp_pred, htp0.future(), decoded, gt, reg_pred, htp0.future(),
        weights=weights, ego_pred=ego_pred, ego_target=ego_target,
    )
    optimizer.zero_grad()
    losses.total.backward()
    clip_grad_norm(model.parameters(), grad_clip)
    optimizer.step()
    return losses


def batch_seed(seed: int, epoch: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, epoch, index]).generate_state(1)[0])


class Trainer:
    """Epoch loop with seeded shuffles, a loss curve and resumable checkpoints."""

    def __init__(self, cfg: RunConfig, model: TwinModel, examples: List[Example], out_dir: Path):
        if not examples:
            raise ShapeMismatch("no training examples")
        self.cfg = cfg
        self.model = model
        self.examples = examples
        self.out_dir = Path(out_dir)
        self.ckpt_dir = self.out_dir / "checkpoints"
        self.loss_csv = self.out_dir / "loss_curve.csv"
        self.optimizer = AdamW(model.named_parameters(), lr=cfg.train.lr, weight_decay=cfg.train.weight_decay)
        self.hash = config_hash(cfg)
        self.epoch = 0

    # ----------------- CHECKPOINTS -----------------
    def save(self) -> Path:
        meta = {"epoch": self.epoch, "config_hash": self.hash, "egomotion_mode": self.cfg.egomotion_mode}
        params, optim = self.model.state_dict(), self.optimizer.state_dict()
        path = save_checkpoint(self.ckpt_dir / f"epoch_{self.epoch:04d}.npz", params, optim, meta)
        save_checkpoint(self.ckpt_dir / LATEST, params, optim, meta)
        return path

    def resume(self, path: Optional[Path] = None) -> int:
        path = Path(path) if path else self.ckpt_dir / LATEST
        params, optim, meta = load_checkpoint(path)
        if meta.get("config_hash") != self.hash:
            raise CheckpointMismatch(
                f"checkpoint {path} was trained with config {str(meta.get('config_hash'))[:12]}, "
                f"current config is {self.hash[:12]}"
            )
        self.model.load_state_dict(params)
        self.optimizer.load_state_dict(optim)
        self.epoch = int(meta["epoch"])
        truncate_after_epoch(self.loss_csv, self.epoch)
        logger.info("Resumed | epoch=%d | path=%s", self.epoch, path)
        return self.epoch

    # ----------------- LOOP -----------------
    def run_epoch(self) -> Dict[str, float]:
        tc = self.cfg.train
        order = np.random.default_rng([tc.seed, self.epoch]).permutation(len(self.examples))
        sums: Dict[str, float] = {}
        n_batches = 0
        for b, start in enumerate(range(0, len(order), tc.batch_size)):
            batch = [self.examples[i] for i in order[start:start + tc.batch_size]]
            losses = train_step(
                self.model, batch, self.optimizer, self.cfg.loss_weights,
                seed=batch_seed(tc.seed, self.epoch, b), grad_clip=tc.grad_clip,
            )
            for k, v in losses.values().items():
                sums[k] = sums.get(k, 0.0) + v
            n_batches += 1
        self.epoch += 1
        row = {"epoch": self.epoch, **{k: v / n_batches for k, v in sums.items()}}
        append_csv_row(self.loss_csv, LOSS_COLUMNS, row)
        return row

    def run(self, epochs: Optional[int] = None) -> List[Dict[str, float]]:
        epochs = self.cfg.train.epochs if epochs is None else epochs
        every = max(1, self.cfg.train.checkpoint_every)
        rows = []
        bar = tqdm(range(self.epoch, epochs), desc="train", disable=not settings.show_progress)
        for _ in bar:
            row = self.run_epoch()
            rows.append(row)
            bar.set_postfix(loss=f"{row['total']:.4f}")
            logger.info(
                "Train epoch %d | loss=%.5f | l_dis=%.5f | l_angle=%.5f",
                row["epoch"], row["total"], row["l_dis"], row["l_angle"],
            )
            if self.epoch % every == 0 or self.epoch == epochs:
                self.save()
        return rows


def load_model(cfg: RunConfig, path: Path) -> TwinModel:
    """Rebuilds the model of `cfg` and loads checkpoint weights; the config hash must match."""
    path = Path(path)
    params, _, meta = load_checkpoint(path)
    expected = config_hash(cfg)
    if meta.get("config_hash") != expected:
        raise CheckpointMismatch(
            f"checkpoint {path} was trained with config {str(meta.get('config_hash'))[:12]}, "
            f"current config is {expected[:12]}"
        )
    model = TwinModel(cfg)
    model.load_state_dict(params)
    logger.info("Model loaded | epoch=%s | path=%s", meta.get("epoch"), path)
    return model
