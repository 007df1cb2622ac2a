import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from src.errors import (
    DegenerateConfiguration,
    InvalidPlane,
    NoConsensus,
    PointAtInfinity,
    TooFewCorrespondences,
)
from src.geometry.camera import Intrinsics

logger = logging.getLogger(__name__)

RANSAC_THRESHOLD_PX = 3.0
RANSAC_MAX_ITERS = 2000
RANSAC_CONFIDENCE = 0.999

_COLLINEAR_EPS = 1e-6
_HOMOGENEOUS_EPS = 1e-12


@dataclass(frozen=True)
class Homography:
    h: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.h, dtype=np.float64).reshape(3, 3)
        if abs(H[2, 2]) < _HOMOGENEOUS_EPS:
            raise DegenerateConfiguration("homography with h[2][2]=0 cannot be normalized")
        H = H / H[2, 2]
        if abs(np.linalg.det(H)) < _HOMOGENEOUS_EPS:
            raise DegenerateConfiguration("singular homography")
        object.__setattr__(self, "h", H)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.h))

    def flatten(self) -> np.ndarray:
        return self.h.reshape(9).copy()


@dataclass(frozen=True)
class Correspondences:
    src: np.ndarray
    dst: np.ndarray

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Sequence[float], Sequence[float]]]) -> "Correspondences":
        pairs = list(pairs)
        src = np.array([p[0] for p in pairs], dtype=np.float64).reshape(-1, 2)
        dst = np.array([p[1] for p in pairs], dtype=np.float64).reshape(-1, 2)
        return cls(src, dst)

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.float64).reshape(-1, 2)
        dst = np.asarray(self.dst, dtype=np.float64).reshape(-1, 2)
        if src.shape != dst.shape:
            raise ValueError(f"correspondence sides differ: {src.shape} vs {dst.shape}")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)

    def __len__(self) -> int:
        return int(self.src.shape[0])

    def subset(self, idx) -> "Correspondences":
        return Correspondences(self.src[idx], self.dst[idx])


def _hartley(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Moves the centroid to the origin and scales the mean distance to sqrt(2)."""
    c = pts.mean(axis=0)
    d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    if d < _HOMOGENEOUS_EPS:
        raise DegenerateConfiguration("all correspondence points coincide")
    s = np.sqrt(2.0) / d
    T = np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])
    return (pts - c) * s, T


def _design_matrix(xy: np.ndarray, uv: np.ndarray) -> np.ndarray:
    n = len(xy)
    x, y = xy[:, 0], xy[:, 1]
    u, v = uv[:, 0], uv[:, 1]
    one, zero = np.ones(n), np.zeros(n)
    A = np.zeros((2 * n, 9))
    A[0::2] = np.stack([x, y, one, zero, zero, zero, -u * x, -u * y, -u], axis=1)
    A[1::2] = np.stack([zero, zero, zero, x, y, one, -v * x, -v * y, -v], axis=1)
    return A


def _has_collinear_triple(pts: np.ndarray) -> bool:
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b, c = pts[i], pts[j], pts[k]
                area = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
                if area < _COLLINEAR_EPS:
                    return True
    return False


def estimate_homography_dlt(corr: Correspondences) -> Homography:
    """Normalized DLT: least-squares null vector of the stacked design matrix."""
    if len(corr) < 4:
        raise TooFewCorrespondences(f"need at least 4 correspondences, got {len(corr)}")

    src_n, T_src = _hartley(corr.src)
    dst_n, T_dst = _hartley(corr.dst)
    if len(corr) == 4 and (_has_collinear_triple(src_n) or _has_collinear_triple(dst_n)):
        raise DegenerateConfiguration("minimal sample contains three collinear points")

    A = _design_matrix(src_n, dst_n)
    _, s, Vt = np.linalg.svd(A)
    # rank < 8 means the null space is not one-dimensional
    if s[7] <= s[0] * 1e-10:
        raise DegenerateConfiguration("design matrix is rank-deficient")

    Hn = Vt[-1].reshape(3, 3)
    H = np.linalg.inv(T_dst) @ Hn @ T_src
    return Homography(H)


def apply_homography(H: Homography, p: np.ndarray) -> np.ndarray:
    """Perspective-divided image of one point (2,) or of many points (n, 2)."""
    pts = np.asarray(p, dtype=np.float64)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 2)
    q = np.concatenate([pts, np.ones((len(pts), 1))], axis=1) @ H.h.T
    w = q[:, 2]
    if np.any(np.abs(w) < _HOMOGENEOUS_EPS):
        raise PointAtInfinity("point maps to infinity under the homography")
    out = q[:, :2] / w[:, None]
    return out[0] if single else out


def reprojection_errors(H: Homography, corr: Correspondences) -> np.ndarray:
    q = np.concatenate([corr.src, np.ones((len(corr), 1))], axis=1) @ H.h.T
    w = q[:, 2]
    # points sent to infinity count as gross outliers
    bad = np.abs(w) < _HOMOGENEOUS_EPS
    w = np.where(bad, 1.0, w)
    err = np.linalg.norm(q[:, :2] / w[:, None] - corr.dst, axis=1)
    err[bad] = np.inf
    return err


def estimate_homography_ransac(
    corr: Correspondences,
    threshold_px: float = RANSAC_THRESHOLD_PX,
    max_iters: int = RANSAC_MAX_ITERS,
    rng_seed: int = 0,
) -> Tuple[Homography, np.ndarray]:
    n = len(corr)
    if n < 4:
        raise TooFewCorrespondences(f"need at least 4 correspondences, got {n}")

    rng = np.random.default_rng(rng_seed)
    best_count, best_err, best_mask = 0, np.inf, None
    needed = max_iters
    it = 0
    while it < min(max_iters, needed):
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        sample = corr.subset(idx)
        if _has_collinear_triple(sample.src) or _has_collinear_triple(sample.dst):
            continue
        try:
            H = estimate_homography_dlt(sample)
        except DegenerateConfiguration:
            continue

        err = reprojection_errors(H, corr)
        mask = err < threshold_px
        count = int(mask.sum())
        score = float(err[mask].sum())
        if count > best_count or (count == best_count and count > 0 and score < best_err):
            best_count, best_err, best_mask = count, score, mask
            w = count / n
            if 0 < w < 1:
                denom = np.log(1.0 - w ** 4)
                if denom < 0:
                    needed = int(np.ceil(np.log(1.0 - RANSAC_CONFIDENCE) / denom))
            elif w == 1:
                needed = it

    if best_mask is None or best_count < 4:
        raise NoConsensus(f"best consensus has {best_count} inliers after {it} iterations")

    H = estimate_homography_dlt(corr.subset(best_mask))
    mask = reprojection_errors(H, corr) < threshold_px
    if int(mask.sum()) >= 4 and not np.array_equal(mask, best_mask):
        H = estimate_homography_dlt(corr.subset(mask))
        mask = reprojection_errors(H, corr) < threshold_px

    logger.debug("RANSAC | pairs=%d | inliers=%d | iters=%d", n, int(mask.sum()), it)
    return H, mask


def homography_from_camera_motion(
    K: Intrinsics,
    R: np.ndarray,
    t: np.ndarray,
    plane_normal: np.ndarray,
    plane_depth: float,
) -> Homography:
    """
    Plane-induced homography H = K(R − t·nᵀ/d)K⁻¹.

    The plane is {X : nᵀX + d = 0} in the first camera's frame and
    X₂ = R·X₁ + t maps first-camera coordinates to the second camera,
    so H sends first-view pixels to second-view pixels.
    """
    if plane_depth <= 0:
        raise InvalidPlane(f"plane depth must be positive, got {plane_depth}")
    R = np.asarray(R, dtype=np.float64).reshape(3, 3)
    t = np.asarray(t, dtype=np.float64).reshape(3, 1)
    n = np.asarray(plane_normal, dtype=np.float64).reshape(3)
    norm = np.linalg.norm(n)
    if norm < _HOMOGENEOUS_EPS:
        raise InvalidPlane("plane normal has zero length")
    n = (n / norm).reshape(1, 3)

    Km = K.matrix()
    H = Km @ (R - t @ n / plane_depth) @ np.linalg.inv(Km)
    return Homography(H)
