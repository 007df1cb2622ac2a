from src.geometry.camera import (
    Intrinsics,
    PointCloud,
    PoseSE3,
    ProjectedPoints,
    pixel_indices,
    project_points,
    remove_hand_points,
    transform_points,
    unproject_points,
)
from src.geometry.homography import (
    Correspondences,
    Homography,
    apply_homography,
    estimate_homography_dlt,
    estimate_homography_ransac,
    homography_from_camera_motion,
    reprojection_errors,
)
from src.geometry.voxels import GRID_DIMS, GRID_RESOLUTION, OccupancyGrid, grid_origin_for, voxelize

__all__ = [
    "Correspondences",
    "GRID_DIMS",
    "GRID_RESOLUTION",
    "Homography",
    "Intrinsics",
    "OccupancyGrid",
    "PointCloud",
    "PoseSE3",
    "ProjectedPoints",
    "apply_homography",
    "estimate_homography_dlt",
    "estimate_homography_ransac",
    "grid_origin_for",
    "homography_from_camera_motion",
    "pixel_indices",
    "project_points",
    "remove_hand_points",
    "reprojection_errors",
    "transform_points",
    "unproject_points",
    "voxelize",
]
