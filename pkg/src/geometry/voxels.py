import struct
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.errors import FormatError
from src.geometry.camera import PointCloud

GRID_DIMS = (20, 20, 20)
GRID_RESOLUTION = 0.05

_HEADER = struct.Struct("<3dd3I")


@dataclass(frozen=True)
class OccupancyGrid:
    """Binary grid; `cells` is flat with x fastest, then y, then z."""

    origin: np.ndarray
    resolution: float
    dims: Tuple[int, int, int]
    cells: np.ndarray

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        dims = tuple(int(d) for d in self.dims)
        cells = np.asarray(self.cells, dtype=np.uint8).reshape(-1)
        if cells.size != dims[0] * dims[1] * dims[2]:
            raise ValueError(f"cell count {cells.size} does not match dims {dims}")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64).reshape(3))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "cells", cells)

    def flat_index(self, ix: int, iy: int, iz: int) -> int:
        nx, ny, _ = self.dims
        return ix + nx * (iy + ny * iz)

    def occupied(self, ix: int, iy: int, iz: int) -> bool:
        return bool(self.cells[self.flat_index(ix, iy, iz)])

    def occupied_count(self) -> int:
        return int(self.cells.sum())

    def as_volume(self) -> np.ndarray:
        """(z, y, x) array; its row-major flattening is the x-fastest cell order."""
        nx, ny, nz = self.dims
        return self.cells.reshape(nz, ny, nx)

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(*self.origin.tolist(), float(self.resolution), *self.dims)
        return header + self.cells.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "OccupancyGrid":
        if len(blob) < _HEADER.size:
            raise FormatError("occupancy grid blob shorter than its header")
        ox, oy, oz, res, nx, ny, nz = _HEADER.unpack_from(blob, 0)
        body = np.frombuffer(blob, dtype=np.uint8, offset=_HEADER.size)
        if body.size != nx * ny * nz:
            raise FormatError(f"expected {nx * ny * nz} cells, found {body.size}")
        return cls(origin=np.array([ox, oy, oz]), resolution=res, dims=(nx, ny, nz), cells=body.copy())


def voxelize(
    pc: PointCloud,
    origin,
    resolution: float = GRID_RESOLUTION,
    dims: Tuple[int, int, int] = GRID_DIMS,
) -> OccupancyGrid:
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    origin = np.asarray(origin, dtype=np.float64).reshape(3)
    dims = tuple(int(d) for d in dims)
    cells = np.zeros(dims[0] * dims[1] * dims[2], dtype=np.uint8)
    if len(pc):
        idx = np.floor((np.asarray(pc.points, dtype=np.float64) - origin) / resolution).astype(np.int64)
        inside = np.all((idx >= 0) & (idx < np.array(dims)), axis=1)
        idx = idx[inside]
        flat = idx[:, 0] + dims[0] * (idx[:, 1] + dims[1] * idx[:, 2])
        cells[flat] = 1
    return OccupancyGrid(origin=origin, resolution=float(resolution), dims=dims, cells=cells)


def grid_origin_for(
    waypoints: np.ndarray,
    resolution: float = GRID_RESOLUTION,
    dims: Tuple[int, int, int] = GRID_DIMS,
) -> np.ndarray:
    """Origin that centers the grid extent on the mean of the given waypoints."""
    center = np.asarray(waypoints, dtype=np.float64).reshape(-1, 3).mean(axis=0)
    extent = np.array(dims, dtype=np.float64) * resolution
    return center - extent / 2.0
