"""
Sequence file format, little-endian:

    magic "HTPSEQ" + version byte "1"
    header: id (u16 length + utf-8), N_p u32, N_f u32,
            intrinsics 6×f64 (fx, fy, cx, cy, width, height), mode tag u8
    per frame: pose 12×f64, waypoint 3×f64, homography 9×f64,
               point count u32 + points f32×3,
               mask as u32 run count + u32 run lengths (row-major, first run is zeros)
"""
import logging
import struct
from pathlib import Path
from typing import List, Tuple

import numpy as np

from src.data.sequence import SYNERGY_MODES, Sequence
from src.errors import DatasetIoError, FormatError
from src.geometry import Homography, Intrinsics, PointCloud, PoseSE3

logger = logging.getLogger(__name__)

MAGIC = b"HTPSEQ"
VERSION = b"1"

_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_HEADER = struct.Struct("<II6dB")


def encode_mask(mask: np.ndarray) -> np.ndarray:
    """Run lengths of the flattened mask, alternating 0-runs and 1-runs, starting with 0."""
    flat = np.asarray(mask, dtype=bool).reshape(-1)
    if flat.size == 0:
        return np.zeros(0, dtype=np.uint32)
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(bounds)
    if flat[0]:
        runs = np.concatenate([[0], runs])
    return runs.astype(np.uint32)


def decode_mask(runs: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    runs = np.asarray(runs, dtype=np.int64)
    if runs.sum() != shape[0] * shape[1]:
        raise FormatError(f"mask runs cover {int(runs.sum())} pixels, expected {shape[0] * shape[1]}")
    values = (np.arange(len(runs)) % 2).astype(bool)
    return np.repeat(values, runs).reshape(shape)


def write_sequence(seq: Sequence, path: Path) -> Path:
    path = Path(path)
    K = seq.intrinsics
    sid = seq.id.encode("utf-8")
    parts: List[bytes] = [
        MAGIC,
        VERSION,
        _U16.pack(len(sid)),
        sid,
        _HEADER.pack(seq.n_past, seq.n_future, *K.as_tuple(), SYNERGY_MODES.index(seq.synergy_mode)),
    ]
    for k in range(seq.n_frames):
        parts.append(np.asarray(seq.poses[k].flatten(), dtype="<f8").tobytes())
        parts.append(np.asarray(seq.waypoints[k], dtype="<f8").tobytes())
        parts.append(np.asarray(seq.homographies[k].flatten(), dtype="<f8").tobytes())
        pts = np.asarray(seq.point_clouds[k].points, dtype="<f4")
        parts.append(_U32.pack(len(pts)))
        parts.append(pts.tobytes())
        runs = encode_mask(seq.masks[k]).astype("<u4")
        parts.append(_U32.pack(len(runs)))
        parts.append(runs.tobytes())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(parts))
    except OSError as e:
        raise DatasetIoError(f"cannot write sequence file {path}: {e}") from e
    return path


class _Reader:
    def __init__(self, blob: bytes, path: Path):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise FormatError(f"truncated sequence file {self.path} at byte {self.pos} (need {n} more)")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).copy()


def read_sequence(path: Path) -> Sequence:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise DatasetIoError(f"cannot read sequence file {path}: {e}") from e

    r = _Reader(blob, path)
    if r.take(len(MAGIC)) != MAGIC:
        raise FormatError(f"{path} is not a sequence file (bad magic)")
    version = r.take(1)
    if version != VERSION:
        raise FormatError(
            f"{path}: unsupported sequence format version {version.decode('latin-1')!r}, "
            f"expected {VERSION.decode()!r}"
        )
    (id_len,) = r.unpack(_U16)
    seq_id = r.take(id_len).decode("utf-8")
    n_past, n_future, fx, fy, cx, cy, width, height, mode = r.unpack(_HEADER)
    if mode >= len(SYNERGY_MODES):
        raise FormatError(f"{path}: unknown synergy mode tag {mode}")
    K = Intrinsics(fx=fx, fy=fy, cx=cx, cy=cy, width=int(width), height=int(height))

    poses, waypoints, homographies, clouds, masks = [], [], [], [], []
    for _ in range(n_past + n_future):
        poses.append(PoseSE3.from_flat(r.array("<f8", 12)))
        waypoints.append(r.array("<f8", 3))
        homographies.append(Homography(r.array("<f8", 9).reshape(3, 3)))
        (n_points,) = r.unpack(_U32)
        clouds.append(PointCloud(r.array("<f4", 3 * n_points).reshape(-1, 3).astype(np.float64), frame="camera"))
        (n_runs,) = r.unpack(_U32)
        masks.append(decode_mask(r.array("<u4", n_runs), (K.height, K.width)))
    if r.pos != len(blob):
        raise FormatError(f"{path}: {len(blob) - r.pos} trailing bytes after the last frame")

    return Sequence(
        id=seq_id,
        n_past=n_past,
        n_future=n_future,
        intrinsics=K,
        poses=poses,
        waypoints=np.array(waypoints),
        homographies=homographies,
        point_clouds=clouds,
        masks=masks,
        synergy_mode=SYNERGY_MODES[mode],
    )
