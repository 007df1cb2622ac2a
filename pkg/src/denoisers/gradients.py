"""Finite-difference gradient suite over the differentiable ops and the denoisers (tiny float64 config)."""
import logging
from typing import Callable, Dict, List

import numpy as np

from src.denoisers.embedding import DiffusionStepEmbedding
from src.denoisers.hmtm import HMTMDenoiser, hmtm_forward
from src.denoisers.mamba import MambaBlock, eam_forward
from src.denoisers.sat import SATBlock, sat_forward
from src.numerics import GradCheckReport, MultiHeadAttention, Tensor, grad_check, init_state_matrix, no_grad, ops

logger = logging.getLogger(__name__)

TINY_F = 8
TINY_ROWS = 6
TINY_PAST = 3
TINY_VOX = 4
TINY_HEADS = 2
TINY_FFN = 16


def _cases(seed: int) -> Dict[str, tuple]:
    rng = np.random.default_rng(seed)
    f, n = TINY_F, TINY_ROWS
    z = rng.standard_normal((n, f))

    W, b = Tensor(rng.standard_normal((4, 3))), Tensor(rng.standard_normal(3))
    gamma, beta = Tensor(rng.uniform(0.5, 1.5, 6)), Tensor(rng.standard_normal(6))
    attn = MultiHeadAttention(f, TINY_HEADS, rng)

    d_inner, d_state = 4, 16
    delta = Tensor(rng.uniform(0.05, 0.5, (n, d_inner)))
    A = Tensor(init_state_matrix(d_inner, d_state))
    B = Tensor(rng.standard_normal((n, d_state)))
    C = Tensor(rng.standard_normal((n, d_state)))

    with no_grad():
        t_embed = DiffusionStepEmbedding(f, rng)(5)
    eam = MambaBlock(f, rng, conditioned=True)
    ego = Tensor(rng.standard_normal((n, f)))
    sat = SATBlock(f, rng, n_head=TINY_HEADS, d_ffn=TINY_FFN)
    x_vox = Tensor(rng.standard_normal((TINY_VOX, f)))
    hmtm = HMTMDenoiser(f, "EAM-EAM-SAT", rng, n_head=TINY_HEADS, d_ffn=TINY_FFN)

    cases: Dict[str, tuple] = {
        "affine_map": (lambda x: ops.affine_map(x, W, b), rng.standard_normal((5, 4))),
        "layer_norm": (lambda x: ops.layer_norm(x, gamma, beta), rng.standard_normal((4, 6))),
        "multi_head_attention": (lambda x: attn(x, x, x), z),
        "selective_scan": (lambda x: ops.selective_scan(x, delta, A, B, C), rng.standard_normal((n, d_inner))),
        "eam_forward": (lambda x: eam_forward(eam, x, ego, t_embed), z),
        "sat_forward": (lambda x: sat_forward(sat, x, x_vox, t_embed, n_past=TINY_PAST), z),
        "hmtm_forward": (lambda x: hmtm_forward(hmtm, x, ego, x_vox, 5, n_past=TINY_PAST), z),
    }
    return cases


GRADIENT_CASES = (
    "affine_map",
    "layer_norm",
    "multi_head_attention",
    "selective_scan",
    "eam_forward",
    "sat_forward",
    "hmtm_forward",
)


def gradient_suite(seed: int = 0, eps: float = 1e-5, tol: float = 1e-4) -> List[GradCheckReport]:
    """Analytic vs central-difference input gradients of every case; float64 throughout."""
    cases = _cases(seed)
    reports = []
    for name in GRADIENT_CASES:
        fn: Callable[[Tensor], Tensor]
        fn, x = cases[name]
        reports.append(grad_check(fn, x, eps=eps, tol=tol, seed=seed, name=name))
    failed = [r.name for r in reports if not r.passed]
    if failed:
        logger.warning("Gradient suite | failed=%s", failed)
    return reports
