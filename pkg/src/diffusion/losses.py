from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.config import LossWeights
from src.errors import ShapeMismatch
from src.numerics import Tensor, as_tensor, ops

ANGLE_MIN_NORM = 1e-8


@dataclass
class LossBundle:
    l_vlb_ego: Tensor
    l_vlb_htp: Tensor
    l_dis: Tensor
    l_reg: Tensor
    l_angle: Tensor
    weights: LossWeights
    total: Tensor

    def values(self) -> Dict[str, float]:
        return {
            "total": self.total.item(),
            "l_vlb_ego": self.l_vlb_ego.item(),
            "l_vlb_htp": self.l_vlb_htp.item(),
            "l_dis": self.l_dis.item(),
            "l_reg": self.l_reg.item(),
            "l_angle": self.l_angle.item(),
        }


def _check_same(name: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(f"{name}: prediction {a.shape} vs target {b.shape}")


def latent_mse(pred: Tensor, target: Tensor) -> Tensor:
    """Mean squared error against a detached target."""
    pred, target = as_tensor(pred), as_tensor(target)
    _check_same("latent_mse", pred, target)
    return ops.mean(ops.square(ops.sub(pred, target.detach())))


def displacement_loss(decoded: Tensor, gt: Tensor) -> Tensor:
    """Mean Euclidean distance between predicted and GT future waypoints."""
    decoded, gt = as_tensor(decoded), as_tensor(gt, dtype=as_tensor(decoded).dtype)
    _check_same("displacement_loss", decoded, gt)
    return ops.mean(ops.row_norm(ops.sub(decoded, gt)))


def angle_loss(decoded: Tensor, gt: Tensor) -> Tensor:
    """
    Mean (1 - cos) between successive displacement vectors of prediction and
    GT; pairs where either displacement is shorter than 1e-8 are skipped.
    """
    decoded, gt = as_tensor(decoded), as_tensor(gt, dtype=as_tensor(decoded).dtype)
    _check_same("angle_loss", decoded, gt)
    if decoded.shape[-2] < 2:
        return Tensor(np.zeros((), dtype=decoded.dtype))
    d_pred = ops.sub(decoded[..., 1:, :], decoded[..., :-1, :])
    d_gt = ops.sub(gt[..., 1:, :], gt[..., :-1, :])
    n_pred, n_gt = ops.row_norm(d_pred), ops.row_norm(d_gt)
    valid = (n_pred.data >= ANGLE_MIN_NORM) & (n_gt.data >= ANGLE_MIN_NORM)
    count = int(valid.sum())
    if count == 0:
        return Tensor(np.zeros((), dtype=decoded.dtype))
    denom = ops.add(ops.mul(n_pred, n_gt), (~valid).astype(decoded.dtype))
    cos = ops.div(ops.sum(ops.mul(d_pred, d_gt), axis=-1), denom)
    mask = valid.astype(decoded.dtype)
    return ops.div(ops.sum(ops.mul(ops.sub(1.0, cos), mask)), float(count))


def compute_losses(
    htp_pred: Tensor,
    htp_target: Tensor,
    decoded: Tensor,
    gt_waypoints,
    reg_pred: Tensor,
    reg_target: Tensor,
    weights: Optional[LossWeights] = None,
    ego_pred: Optional[Tensor] = None,
    ego_target: Optional[Tensor] = None,
) -> LossBundle:
    """
    Both VLB terms are x0-prediction MSEs over future latents. The egomotion
    term is zero when the egomotion diffusion is not part of the run.
    """
    weights = weights or LossWeights()
    dtype = as_tensor(htp_pred).dtype
    zero = Tensor(np.zeros((), dtype=dtype))

    l_vlb_ego = zero if ego_pred is None else latent_mse(ego_pred, ego_target)
    l_vlb_htp = latent_mse(htp_pred, htp_target)
    l_dis = displacement_loss(decoded, gt_waypoints)
    l_angle = angle_loss(decoded, gt_waypoints)
    l_reg = latent_mse(reg_pred, reg_target)

    total = zero
    for w, term in (
        (weights.vlb_ego, l_vlb_ego),
        (weights.vlb_htp, l_vlb_htp),
        (weights.dis, l_dis),
        (weights.reg, l_reg),
        (weights.angle, l_angle),
    ):
        total = ops.add(total, ops.mul(term, w))
    return LossBundle(
        l_vlb_ego=l_vlb_ego,
        l_vlb_htp=l_vlb_htp,
        l_dis=l_dis,
        l_reg=l_reg,
        l_angle=l_angle,
        weights=weights,
        total=total,
    )
