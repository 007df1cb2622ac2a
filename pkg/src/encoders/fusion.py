import numpy as np

from src.encoders.features import HTPLatents, VisionFeatures
from src.errors import LengthMismatch
from src.numerics import MLP, Linear, Module, Tensor, as_tensor, ops


class FusionModule(Module):
    """
    Per-row fusion of waypoints and visual features: waypoint MLP and a
    feature projection, concatenated channel-wise, mixed by a pointwise
    (1×1) linear map and a perceptron. No mixing across time.
    """

    def __init__(self, f: int, x: int, rng: np.random.Generator, dtype=np.float64):
        self.waypoint_mlp = MLP(3, f, f, rng, dtype=dtype)
        self.feature_proj = Linear(x, f, rng, dtype=dtype)
        self.pointwise = Linear(2 * f, f, rng, dtype=dtype)
        self.mlp = MLP(f, f, f, rng, dtype=dtype)

    def forward(self, waypoints: Tensor, X_sem: Tensor) -> Tensor:
        waypoints, X_sem = as_tensor(waypoints), as_tensor(X_sem)
        if waypoints.shape[-2] != X_sem.shape[-2]:
            raise LengthMismatch(f"{waypoints.shape[-2]} waypoints vs {X_sem.shape[-2]} feature rows")
        h = ops.concat([self.waypoint_mlp(waypoints), self.feature_proj(X_sem)], axis=-1)
        return self.mlp(ops.silu(self.pointwise(h)))


def fuse_htp(fusion: FusionModule, waypoints, X_sem: VisionFeatures) -> HTPLatents:
    w = np.asarray(waypoints.data if isinstance(waypoints, Tensor) else waypoints)
    if w.shape[-2] != X_sem.X.shape[-2]:
        raise LengthMismatch(f"{w.shape[-2]} waypoints vs {X_sem.X.shape[-2]} feature rows")
    F = fusion(as_tensor(waypoints, dtype=X_sem.X.dtype), X_sem.X)
    return HTPLatents(F=F, anchor_len=X_sem.n_past)
