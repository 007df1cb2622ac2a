import numpy as np

from src.numerics import MLP, Module, Tensor, as_tensor


class TrajectoryDecoder(Module):
    def __init__(self, f: int, rng: np.random.Generator, dtype=np.float64):
        self.mlp = MLP(f, f, 3, rng, dtype=dtype)

    def forward(self, latents: Tensor) -> Tensor:
        return self.mlp(as_tensor(latents))


def decode_trajectory(decoder: TrajectoryDecoder, F_htp_f) -> np.ndarray:
    """Decodes future latent rows to N_f global-frame waypoints in meters."""
    return np.asarray(decoder(F_htp_f).data, dtype=np.float64)
