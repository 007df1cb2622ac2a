from src.denoisers.embedding import DiffusionStepEmbedding
from src.denoisers.gradients import GRADIENT_CASES, gradient_suite
from src.denoisers.hmtm import HMTMDenoiser, hmtm_forward
from src.denoisers.mamba import MambaBlock, VanillaMambaDenoiser, eam_forward, vm_forward
from src.denoisers.pattern import BLOCK_TAGS, DEFAULT_PATTERN, ABLATION_PATTERNS, HybridPattern
from src.denoisers.sat import SATBlock, sat_forward, time_positions

__all__ = [
    "BLOCK_TAGS",
    "DEFAULT_PATTERN",
    "DiffusionStepEmbedding",
    "GRADIENT_CASES",
    "HMTMDenoiser",
    "HybridPattern",
    "MambaBlock",
    "SATBlock",
    "ABLATION_PATTERNS",
    "VanillaMambaDenoiser",
    "eam_forward",
    "gradient_suite",
    "hmtm_forward",
    "sat_forward",
    "time_positions",
    "vm_forward",
]
