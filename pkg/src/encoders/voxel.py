from typing import Tuple

import numpy as np

from src.encoders.features import VoxelPatches
from src.errors import GridDimMismatch
from src.geometry import GRID_DIMS, OccupancyGrid
from src.numerics import Conv3d, Module, Tensor, as_tensor, ops

# a 20³ grid shrinks to 10³ (k4 s2 p1), then to 3³ (k4 s3 p1)
STAGE1 = dict(kernel=4, stride=2, padding=1)
STAGE2 = dict(kernel=4, stride=3, padding=1)


def patch_grid(dims: Tuple[int, int, int]) -> Tuple[int, int, int]:
    out = []
    for n in dims:
        n1 = ops.conv_output_size(n, STAGE1["kernel"], STAGE1["stride"], STAGE1["padding"])
        out.append(ops.conv_output_size(n1, STAGE2["kernel"], STAGE2["stride"], STAGE2["padding"]))
    return tuple(out)


def receptive_range(o: int) -> Tuple[int, int]:
    """Inclusive input index range seen by output cell o along one axis."""
    lo1 = STAGE2["stride"] * o - STAGE2["padding"]
    hi1 = lo1 + STAGE2["kernel"] - 1
    lo = STAGE1["stride"] * lo1 - STAGE1["padding"]
    hi = STAGE1["stride"] * hi1 - STAGE1["padding"] + STAGE1["kernel"] - 1
    return lo, hi


class VoxelEncoder(Module):
    """Two strided 3D convolutions taking 1 channel to `hidden` and then to f; the first one is bias-free."""

    def __init__(
        self,
        f: int,
        rng: np.random.Generator,
        hidden: int = 64,
        dims: Tuple[int, int, int] = GRID_DIMS,
        dtype=np.float64,
    ):
        self.dims = tuple(dims)
        self.conv1 = Conv3d(1, hidden, rng=rng, bias=False, dtype=dtype, **STAGE1)
        self.conv2 = Conv3d(hidden, f, rng=rng, dtype=dtype, **STAGE2)

    def forward(self, volume: Tensor) -> Tensor:
        """Maps a (…, 1, Z, Y, X) occupancy volume to (…, N_vox, f) patches, x fastest."""
        volume = as_tensor(volume)
        h = self.conv2(ops.silu(self.conv1(volume)))
        *lead, f, dz, dy, dx = h.shape
        return ops.swapaxes(ops.reshape(h, (*lead, f, dz * dy * dx)), -1, -2)


def grid_volume(grid: OccupancyGrid, dtype=np.float64) -> np.ndarray:
    return grid.as_volume().astype(dtype)[None]


def encode_voxels(encoder: VoxelEncoder, grid: OccupancyGrid) -> VoxelPatches:
    if tuple(grid.dims) != encoder.dims:
        raise GridDimMismatch(f"grid dims {grid.dims} != encoder dims {encoder.dims}")
    return VoxelPatches(X=encoder(Tensor(grid_volume(grid, encoder.conv1.weight.dtype))))
