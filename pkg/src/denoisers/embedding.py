import numpy as np

from src.numerics import Linear, Module, Tensor, ops, sinusoidal_encoding


class DiffusionStepEmbedding(Module):
    """Sinusoidal encoding of the step index followed by a learned projection."""

    def __init__(self, f: int, rng: np.random.Generator, dtype=np.float64):
        self.f = f
        self.proj = Linear(f, f, rng, dtype=dtype)

    def forward(self, t) -> Tensor:
        """
        A scalar step gives a (1, f) row that broadcasts over the sequence.
        A batch of steps of shape (B,) gives (B, 1, f).
        """
        steps = np.asarray(t)
        table = sinusoidal_encoding(steps.reshape(-1), self.f).astype(self.proj.weight.dtype)
        emb = self.proj(Tensor(table))
        if steps.ndim == 0:
            return emb
        return ops.reshape(emb, (steps.shape[0], 1, self.f))
