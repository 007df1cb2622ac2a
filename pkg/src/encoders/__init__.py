from src.encoders.decoder import TrajectoryDecoder, decode_trajectory
from src.encoders.egomotion import EgomotionEncoder, egomotion_inputs, encode_egomotion, input_kind
from src.encoders.features import EgomotionFeatures, HTPLatents, VisionFeatures, VoxelPatches
from src.encoders.fusion import FusionModule, fuse_htp
from src.encoders.vision import (
    FileFeatureProvider,
    HttpFeatureProvider,
    SyntheticProvider,
    VisionProvider,
    make_provider,
    provider_from_config,
    vision_features,
)
from src.encoders.voxel import VoxelEncoder, encode_voxels, grid_volume, patch_grid, receptive_range

__all__ = [
    "EgomotionEncoder",
    "EgomotionFeatures",
    "FileFeatureProvider",
    "FusionModule",
    "HTPLatents",
    "HttpFeatureProvider",
    "SyntheticProvider",
    "TrajectoryDecoder",
    "VisionFeatures",
    "VisionProvider",
    "VoxelEncoder",
    "VoxelPatches",
    "decode_trajectory",
    "egomotion_inputs",
    "encode_egomotion",
    "encode_voxels",
    "fuse_htp",
    "grid_volume",
    "input_kind",
    "make_provider",
    "provider_from_config",
    "patch_grid",
    "receptive_range",
    "vision_features",
]
