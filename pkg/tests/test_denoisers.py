import numpy as np
import pytest

from src.denoisers import (
    ABLATION_PATTERNS,
    DiffusionStepEmbedding,
    HMTMDenoiser,
    HybridPattern,
    MambaBlock,
    SATBlock,
    VanillaMambaDenoiser,
    eam_forward,
    hmtm_forward,
    sat_forward,
    time_positions,
    vm_forward,
)
from src.errors import InvalidPattern, ShapeMismatch
from src.numerics import Tensor, no_grad

F = 8


@pytest.fixture
def t_embed(rng):
    with no_grad():
        return DiffusionStepEmbedding(F, rng)(7)


# ----------------- PATTERNS -----------------
def test_pattern_parsing():
    assert str(HybridPattern.parse("eam-eam-sat")) == "EAM-EAM-SAT"
    assert len(ABLATION_PATTERNS) == 5
    assert all(len(HybridPattern.parse(p)) in (2, 3) for p in ABLATION_PATTERNS)
    with pytest.raises(InvalidPattern):
        HybridPattern.parse("XYZ")
    with pytest.raises(InvalidPattern):
        HybridPattern.parse("")


# ----------------- MAMBA -----------------
def test_eam_without_egomotion_equals_vanilla_block(rng, t_embed):
    vanilla = MambaBlock(F, np.random.default_rng(5))
    aware = MambaBlock(F, np.random.default_rng(5), conditioned=True)
    aware.ego_proj.bias.data[:] = 0.0
    z = Tensor(rng.standard_normal((6, F)))
    ego = Tensor(np.zeros((6, F)))
    assert np.allclose(eam_forward(aware, z, ego, t_embed).data, vm_forward(vanilla, z, t_embed).data)


def test_egomotion_changes_eam_output(rng, t_embed):
    block = MambaBlock(F, rng, conditioned=True)
    z = Tensor(rng.standard_normal((6, F)))
    a = eam_forward(block, z, Tensor(np.zeros((6, F))), t_embed).data
    b = eam_forward(block, z, Tensor(rng.standard_normal((6, F))), t_embed).data
    assert not np.allclose(a, b)


def test_mamba_block_is_causal(rng, t_embed):
    block = MambaBlock(F, rng)
    z = rng.standard_normal((6, F))
    bumped = z.copy()
    bumped[4] += 1.0
    a = vm_forward(block, Tensor(z), t_embed).data
    b = vm_forward(block, Tensor(bumped), t_embed).data
    assert np.allclose(a[:4], b[:4])
    assert not np.allclose(a[4:], b[4:])


@pytest.mark.parametrize("t", [0, 3, 7])
def test_egomotion_row_reaches_only_later_rows(rng, t_embed, t):
    d_conv = 3
    block = MambaBlock(F, rng, d_state=4, d_conv=d_conv, conditioned=True)
    z = Tensor(rng.standard_normal((8, F)))
    ego = rng.standard_normal((8, F))
    bumped = ego.copy()
    bumped[t] += 1.0
    a = eam_forward(block, z, Tensor(ego), t_embed).data
    b = eam_forward(block, z, Tensor(bumped), t_embed).data
    first = max(t - (d_conv - 1), 0)
    assert np.allclose(a[:first], b[:first], atol=1e-12)
    assert not np.allclose(a[t], b[t])


def test_eam_requires_matching_egomotion(rng, t_embed):
    block = MambaBlock(F, rng, conditioned=True)
    z = Tensor(rng.standard_normal((6, F)))
    with pytest.raises(ShapeMismatch):
        eam_forward(block, z, Tensor(np.zeros((5, F))), t_embed)
    with pytest.raises(ShapeMismatch):
        block(z, t_embed)


def test_vanilla_denoiser_shape(rng):
    vm = VanillaMambaDenoiser(F, rng, n_layers=2, d_state=4)
    assert vm(Tensor(rng.standard_normal((2, 6, F))), np.array([1, 5])).shape == (2, 6, F)


# ----------------- SAT -----------------
def test_time_positions():
    assert time_positions(5, 3).tolist() == [-2, -1, 0, 1, 2]


def test_sat_with_and_without_voxels(rng, t_embed):
    block = SATBlock(F, rng, n_head=2, d_ffn=16)
    z = Tensor(rng.standard_normal((6, F)))
    with_vox = sat_forward(block, z, Tensor(rng.standard_normal((27, F))), t_embed, n_past=4)
    without = sat_forward(block, z, None, t_embed, n_past=4)
    assert with_vox.shape == without.shape == (6, F)
    assert not np.allclose(with_vox.data, without.data)


def test_sat_ignores_voxel_patch_order(rng, t_embed):
    block = SATBlock(F, rng, n_head=2, d_ffn=16)
    z = Tensor(rng.standard_normal((6, F)))
    x_vox = rng.standard_normal((27, F))
    a = sat_forward(block, z, Tensor(x_vox), t_embed, n_past=4).data
    b = sat_forward(block, z, Tensor(x_vox[rng.permutation(27)]), t_embed, n_past=4).data
    assert np.allclose(a, b, atol=1e-12)


def test_sat_mixes_over_the_whole_sequence(rng, t_embed):
    block = SATBlock(F, rng, n_head=2, d_ffn=16)
    z = rng.standard_normal((6, F))
    bumped = z.copy()
    bumped[-1] += 1.0
    a = sat_forward(block, Tensor(z), None, t_embed, n_past=4).data
    b = sat_forward(block, Tensor(bumped), None, t_embed, n_past=4).data
    assert not np.allclose(a[0], b[0])


def test_sat_rejects_bad_shapes(rng, t_embed):
    with pytest.raises(ShapeMismatch):
        SATBlock(6, rng, n_head=4)
    block = SATBlock(F, rng, n_head=2, d_ffn=16)
    with pytest.raises(ShapeMismatch):
        sat_forward(block, Tensor(np.zeros((6, F))), Tensor(np.zeros((27, F + 1))), t_embed)


# ----------------- HMTM -----------------
@pytest.mark.parametrize("pattern", ABLATION_PATTERNS)
def test_hmtm_output_shape(rng, pattern):
    model = HMTMDenoiser(F, pattern, rng, d_state=4, n_head=2, d_ffn=16)
    z = Tensor(rng.standard_normal((6, F)))
    out = hmtm_forward(model, z, Tensor(rng.standard_normal((6, F))), Tensor(rng.standard_normal((4, F))), 3, n_past=4)
    assert out.shape == (6, F)


def test_hmtm_batched_steps(rng):
    model = HMTMDenoiser(F, "EAM-SAT", rng, d_state=4, n_head=2, d_ffn=16)
    z = Tensor(rng.standard_normal((2, 6, F)))
    out = model(z, np.array([0, 9]), Tensor(rng.standard_normal((2, 6, F))), None, 4)
    assert out.shape == (2, 6, F)


def test_hmtm_egomotion_rows_must_match(rng):
    model = HMTMDenoiser(F, "EAM-SAT", rng, d_state=4, n_head=2, d_ffn=16)
    with pytest.raises(ShapeMismatch):
        model(Tensor(np.zeros((6, F))), 1, Tensor(np.zeros((4, F))))


def test_mamba_only_hmtm_keeps_egomotion_causal(rng):
    d_conv, t = 2, 4
    model = HMTMDenoiser(F, "EAM-EAM", rng, d_state=4, d_conv=d_conv, n_head=2, d_ffn=16)
    z = Tensor(rng.standard_normal((7, F)))
    ego = rng.standard_normal((7, F))
    bumped = ego.copy()
    bumped[t] -= 0.5
    with no_grad():
        a = model(z, 3, Tensor(ego), None, 4).data
        b = model(z, 3, Tensor(bumped), None, 4).data
    assert np.allclose(a[: t - (d_conv - 1)], b[: t - (d_conv - 1)], atol=1e-12)
    assert not np.allclose(a[t:], b[t:])
