import httpx
import numpy as np
import pytest

from src.encoders import (
    EgomotionEncoder,
    FileFeatureProvider,
    FusionModule,
    SyntheticProvider,
    TrajectoryDecoder,
    VisionFeatures,
    VoxelEncoder,
    decode_trajectory,
    egomotion_inputs,
    encode_egomotion,
    encode_voxels,
    fuse_htp,
    patch_grid,
    receptive_range,
    vision_features,
)
from src.errors import EmptySequence, GridDimMismatch, LengthMismatch, ProviderUnavailable
from src.geometry import Homography, OccupancyGrid, PoseSE3
from src.numerics import AdamW, Tensor, no_grad, ops
from src.services.features_api import FeaturesAPI
from src.services.http_client import FeatureHttpClient


# ----------------- EGOMOTION -----------------
def test_identical_homographies_give_identical_rows(rng):
    enc = EgomotionEncoder(8, "homography", rng)
    F = encode_egomotion(enc, [Homography.identity(), Homography.identity()]).F.data
    assert F.shape == (2, 8)
    assert np.array_equal(F[0], F[1])


def test_se3_encoder_accepts_poses(rng):
    enc = EgomotionEncoder(8, "se3", rng)
    F = encode_egomotion(enc, [PoseSE3.identity()] * 3, kind="se3").F
    assert F.shape == (3, 8)


def test_empty_egomotion_sequence(rng):
    with pytest.raises(EmptySequence):
        encode_egomotion(EgomotionEncoder(8, "homography", rng), [])


def test_egomotion_input_modes(tiny_sequences):
    seq = tiny_sequences[0]
    n = seq.n_frames
    assert egomotion_inputs(seq, "homography", n).shape == (n, 9)
    se3 = egomotion_inputs(seq, "se3", n)
    assert se3.shape == (n, 12)
    assert np.allclose(se3[0], PoseSE3.identity().flatten())

    held = egomotion_inputs(seq, "constant-last", n)
    assert np.array_equal(held[:seq.n_past], egomotion_inputs(seq, "homography", seq.n_past))
    assert np.all(held[seq.n_past:] == held[seq.n_past - 1])
    assert not egomotion_inputs(seq, "none", n).any()


# ----------------- VISION -----------------
def test_synthetic_provider_is_deterministic(tiny_sequences):
    seq = tiny_sequences[1]
    a = vision_features(SyntheticProvider(seed=3, dim=24), seq, seq.n_past, 0).X.data
    b = vision_features(SyntheticProvider(seed=3, dim=24), seq, seq.n_past, 0).X.data
    assert np.array_equal(a, b)


def test_vision_feature_rows(tiny_sequences):
    seq = tiny_sequences[0]
    provider = SyntheticProvider(dim=24)
    assert vision_features(provider, seq, seq.n_past, 0).X.shape == (seq.n_past, 24)
    assert vision_features(provider, seq, seq.n_past, seq.n_future).X.shape == (seq.n_frames, 24)


def test_vision_modality_off_gives_zeros(tiny_sequences):
    seq = tiny_sequences[0]
    X = vision_features(SyntheticProvider(dim=24), seq, seq.n_past, 0, enabled=False).X.data
    assert X.shape == (seq.n_past, 24) and not X.any()


def test_empty_prompt_grounds_nothing(tiny_sequences):
    seq = tiny_sequences[0]
    X = SyntheticProvider(dim=24).features(seq, seq.n_past, prompt="")
    assert not X[:, :16].any()
    assert X[:, 16:].any()


def test_synthetic_provider_needs_room_for_position_channels():
    with pytest.raises(ValueError):
        SyntheticProvider(dim=8)


def test_file_provider(tmp_path, tiny_sequences):
    seq = tiny_sequences[0]
    path = tmp_path / "features.npz"
    np.savez(path, **{seq.id: np.arange(seq.n_frames * 24, dtype=np.float32).reshape(seq.n_frames, 24)})
    provider = FileFeatureProvider(path, dim=24)
    X = vision_features(provider, seq, seq.n_past, 0).X.data
    assert X.shape == (seq.n_past, 24) and X[1, 0] == 24.0

    with pytest.raises(ProviderUnavailable):
        provider.features(tiny_sequences[1], 3, "hand")
    with pytest.raises(ProviderUnavailable):
        FileFeatureProvider(tmp_path / "missing.npz").features(seq, 3, "hand")


# ----------------- FEATURE SERVICE -----------------
def _client(handler) -> FeatureHttpClient:
    return FeatureHttpClient(base_url="http://features.test", timeout=1.0, transport=httpx.MockTransport(handler))


def test_feature_service_request():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["request_id"] = request.headers.get("X-Request-ID")
        seen["path"] = request.url.path
        return httpx.Response(200, json={"features": np.ones((5, 4)).tolist()})

    feats = FeaturesAPI(_client(handler)).fetch("seq-1", 3, "hand")
    assert feats.shape == (3, 4)
    assert seen["path"] == "/features" and seen["request_id"]


def test_feature_service_errors():
    with pytest.raises(ProviderUnavailable):
        FeaturesAPI(_client(lambda r: httpx.Response(503, text="busy"))).fetch("seq-1", 3, "hand")
    with pytest.raises(ProviderUnavailable):
        FeaturesAPI(_client(lambda r: httpx.Response(200, json={"oops": 1}))).fetch("seq-1", 3, "hand")
    with pytest.raises(ProviderUnavailable):
        FeaturesAPI(FeatureHttpClient(base_url="")).fetch("seq-1", 3, "hand")


# ----------------- FUSION / VOXELS / DECODER -----------------
def test_fusion_is_pointwise(rng):
    fusion = FusionModule(8, 6, rng)
    w = np.tile(rng.standard_normal(3), (4, 1))
    X = VisionFeatures(X=Tensor(np.tile(rng.standard_normal(6), (4, 1))), n_past=4, L=0)
    F = fuse_htp(fusion, w, X)
    assert F.F.shape == (4, 8) and F.anchor_len == 4
    assert np.allclose(F.F.data, F.F.data[0])


def test_fusion_is_row_local(rng):
    fusion = FusionModule(8, 6, rng)
    w = rng.standard_normal((5, 3))
    X = VisionFeatures(X=Tensor(rng.standard_normal((5, 6))), n_past=5, L=0)
    moved = w.copy()
    moved[2] += 0.3
    a, b = fuse_htp(fusion, w, X).F.data, fuse_htp(fusion, moved, X).F.data
    others = [0, 1, 3, 4]
    assert np.allclose(a[others], b[others], atol=1e-12)
    assert not np.allclose(a[2], b[2])


def test_fusion_length_mismatch(rng):
    X = VisionFeatures(X=Tensor(np.zeros((4, 6))), n_past=4, L=0)
    with pytest.raises(LengthMismatch):
        fuse_htp(FusionModule(8, 6, rng), np.zeros((3, 3)), X)


def test_voxel_encoder_gives_27_patches(rng):
    assert patch_grid((20, 20, 20)) == (3, 3, 3)
    enc = VoxelEncoder(8, rng, hidden=4)
    grid = OccupancyGrid(origin=np.zeros(3), resolution=0.05, dims=(20, 20, 20), cells=np.zeros(8000))
    X = encode_voxels(enc, grid).X.data
    assert X.shape == (27, 8)
    assert np.allclose(X, X[0])


def _single_voxel_grid(x, y, z):
    volume = np.zeros((20, 20, 20))
    volume[z, y, x] = 1
    return OccupancyGrid(origin=np.zeros(3), resolution=0.05, dims=(20, 20, 20), cells=volume.reshape(-1))


def test_moving_a_voxel_changes_only_the_patches_that_see_it(rng):
    enc = VoxelEncoder(8, rng, hidden=4)
    old, new = (5, 5, 5), (6, 5, 5)
    a = encode_voxels(enc, _single_voxel_grid(*old)).X.data
    b = encode_voxels(enc, _single_voxel_grid(*new)).X.data

    def sees(o, coord):
        lo, hi = receptive_range(o)
        return lo <= coord <= hi

    affected = {
        ox + 3 * (oy + 3 * oz)
        for oz in range(3) for oy in range(3) for ox in range(3)
        if any(sees(ox, p[0]) and sees(oy, p[1]) and sees(oz, p[2]) for p in (old, new))
    }
    untouched = [r for r in range(27) if r not in affected]
    assert len(untouched) == 19
    assert np.allclose(a[untouched], b[untouched], atol=1e-12)
    assert not np.allclose(a[sorted(affected)], b[sorted(affected)])


def test_voxel_encoder_grid_dims(rng):
    grid = OccupancyGrid(origin=np.zeros(3), resolution=0.05, dims=(8, 8, 8), cells=np.zeros(512))
    with pytest.raises(GridDimMismatch):
        encode_voxels(VoxelEncoder(8, rng, hidden=4), grid)


def test_decoder_is_pointwise(rng):
    decoder = TrajectoryDecoder(8, rng)
    out = decode_trajectory(decoder, Tensor(np.tile(rng.standard_normal(8), (3, 1))))
    assert out.shape == (3, 3)
    assert np.allclose(out, out[0])


def test_fusion_and_decoder_learn_to_reconstruct_waypoints(rng):
    fusion, decoder = FusionModule(16, 6, rng), TrajectoryDecoder(16, rng)
    waypoints = rng.uniform(-0.3, 0.3, (4, 8, 3)) + np.array([0.0, 0.0, 0.5])
    X_sem = Tensor(np.zeros((4, 8, 6)))
    opt = AdamW([*fusion.named_parameters("fusion."), *decoder.named_parameters("decoder.")], lr=3e-3, weight_decay=0.0)
    for _ in range(1500):
        opt.zero_grad()
        loss = ops.mean(ops.square(ops.sub(decoder(fusion(Tensor(waypoints), X_sem)), waypoints)))
        loss.backward()
        opt.step()

    with no_grad():
        recon = decoder(fusion(Tensor(waypoints), X_sem)).data
    assert np.linalg.norm(recon - waypoints, axis=-1).mean() < 0.05
