from src.numerics import ops
from src.numerics.checkpoint import CHECKPOINT_VERSION, load_checkpoint, save_checkpoint
from src.numerics.gradcheck import GradCheckReport, grad_check
from src.numerics.layers import MLP, Conv3d, LayerNorm, Linear, Module, MultiHeadAttention, sinusoidal_encoding
from src.numerics.optim import AdamW, clip_grad_norm
from src.numerics.scan import ScanParams, init_state_matrix, selective_scan
from src.numerics.tensor import Parameter, Tensor, as_tensor, no_grad

__all__ = [
    "AdamW",
    "CHECKPOINT_VERSION",
    "Conv3d",
    "GradCheckReport",
    "LayerNorm",
    "Linear",
    "MLP",
    "Module",
    "MultiHeadAttention",
    "Parameter",
    "ScanParams",
    "Tensor",
    "as_tensor",
    "clip_grad_norm",
    "grad_check",
    "init_state_matrix",
    "load_checkpoint",
    "no_grad",
    "ops",
    "save_checkpoint",
    "selective_scan",
    "sinusoidal_encoding",
]
