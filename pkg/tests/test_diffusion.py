import numpy as np
import pytest

from src.config import LossWeights
from src.diffusion import (
    LatentSeq,
    angle_loss,
    compute_losses,
    displacement_loss,
    make_schedule,
    posterior_step,
    q_sample_partial,
    respace_steps,
    sample_egomotion,
    sample_htp,
)
from src.errors import InvalidK, InvalidT, ShapeMismatch
from src.numerics import Tensor

F = 4


# ----------------- SCHEDULE -----------------
def test_sqrt_schedule_is_monotone():
    s = make_schedule(1000, "sqrt")
    assert s.alpha_bar[0] > 0.96
    assert np.all(np.diff(s.alpha_bar) < 0)
    assert np.all((s.betas > 0) & (s.betas < 1))


def test_linear_schedule_is_monotone():
    for T in (2, 10, 1000):
        s = make_schedule(T, "linear")
        assert np.all(np.diff(s.alpha_bar) < 0)


def test_single_step_schedule_is_valid():
    s = make_schedule(1)
    assert s.T == 1 and 0 < s.alpha_bar[0] < 1


def test_schedule_rejects_bad_input():
    with pytest.raises(InvalidT):
        make_schedule(0)
    with pytest.raises(InvalidT):
        make_schedule(10, "cosine")
    with pytest.raises(InvalidT):
        make_schedule(10).check_step(10)


# ----------------- RESPACING -----------------
def test_respace_steps_examples():
    steps = respace_steps(1000, 100)
    assert len(steps) == 100 and steps[0] == 999 and steps[-1] == 0
    assert all(a > b for a, b in zip(steps, steps[1:]))
    assert respace_steps(1000, 1000) == list(range(999, -1, -1))
    assert respace_steps(1000, 1) == [999]


def test_respace_steps_rejects_bad_k():
    with pytest.raises(InvalidK):
        respace_steps(10, 11)
    with pytest.raises(InvalidK):
        respace_steps(10, 0)


# ----------------- PARTIAL NOISING -----------------
def test_q_sample_zero_noise_scales_future_only(rng):
    s = make_schedule(100)
    z0 = LatentSeq(z=Tensor(rng.standard_normal((7, F))), anchor_len=4)
    zt = q_sample_partial(z0, 30, np.zeros((3, F)), s)
    assert np.array_equal(zt.z.data[:4], z0.z.data[:4])
    assert np.allclose(zt.z.data[4:], np.sqrt(s.alpha_bar[30]) * z0.z.data[4:], atol=1e-12)


def test_q_sample_matches_closed_form(rng):
    s = make_schedule(100)
    z = rng.standard_normal((7, F))
    noise = rng.standard_normal((3, F))
    zt = q_sample_partial(LatentSeq(z=Tensor(z), anchor_len=4), 57, noise, s).z.data
    expected = np.sqrt(s.alpha_bar[57]) * z[4:] + np.sqrt(1 - s.alpha_bar[57]) * noise
    assert np.abs(zt[4:] - expected).max() < 1e-12
    assert np.array_equal(zt[:4], z[:4])


def test_q_sample_per_batch_steps(rng):
    s = make_schedule(100)
    z = rng.standard_normal((2, 7, F))
    noise = rng.standard_normal((2, 3, F))
    zt = q_sample_partial(LatentSeq(z=Tensor(z), anchor_len=4), np.array([0, 99]), noise, s).z.data
    for b, t in enumerate((0, 99)):
        expected = np.sqrt(s.alpha_bar[t]) * z[b, 4:] + np.sqrt(1 - s.alpha_bar[t]) * noise[b]
        assert np.allclose(zt[b, 4:], expected, atol=1e-12)
    assert np.array_equal(zt[:, :4], z[:, :4])


def test_q_sample_noise_shape():
    s = make_schedule(10)
    with pytest.raises(ShapeMismatch):
        q_sample_partial(LatentSeq(z=Tensor(np.zeros((7, F))), anchor_len=4), 1, np.zeros((4, F)), s)


# ----------------- LOSSES -----------------
GT = np.array([[0.0, 0.0, 0.0], [1.0, 0.2, 0.0], [1.5, 1.0, 0.3]])


def test_perfect_prediction_has_zero_loss(rng):
    latents = Tensor(rng.standard_normal((3, F)))
    losses = compute_losses(latents, latents, Tensor(GT), GT, latents, latents, ego_pred=latents, ego_target=latents)
    assert losses.l_dis.item() == 0.0
    assert losses.l_angle.item() == pytest.approx(0.0, abs=1e-12)
    assert losses.total.item() == pytest.approx(0.0, abs=1e-12)


def test_zero_weights_give_zero_total(rng):
    a, b = Tensor(rng.standard_normal((3, F))), Tensor(rng.standard_normal((3, F)))
    weights = LossWeights(vlb_ego=0, vlb_htp=0, dis=0, reg=0, angle=0)
    losses = compute_losses(a, b, Tensor(GT + 1.0), GT, a, b, weights=weights)
    assert losses.total.item() == 0.0
    assert losses.l_vlb_ego.item() == 0.0


def test_total_is_weighted_sum(rng):
    a, b = Tensor(rng.standard_normal((3, F))), Tensor(rng.standard_normal((3, F)))
    weights = LossWeights(vlb_ego=0.5, vlb_htp=2.0, dis=1.0, reg=0.25, angle=3.0)
    losses = compute_losses(a, b, Tensor(GT[::-1].copy()), GT, b, a, weights=weights, ego_pred=b, ego_target=a)
    v = losses.values()
    expected = 0.5 * v["l_vlb_ego"] + 2.0 * v["l_vlb_htp"] + v["l_dis"] + 0.25 * v["l_reg"] + 3.0 * v["l_angle"]
    assert v["total"] == pytest.approx(expected, rel=1e-12)


def test_displacement_loss_example():
    pred = Tensor(np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    assert displacement_loss(pred, np.zeros((2, 3))).item() == pytest.approx(1.5)


def test_angle_loss_examples():
    forward = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    backward = np.array([[0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    sideways = np.array([[0.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    assert angle_loss(Tensor(forward), backward).item() == pytest.approx(2.0)
    assert angle_loss(Tensor(forward), sideways).item() == pytest.approx(1.0)
    # a standing-still ground truth has no direction to compare against
    assert angle_loss(Tensor(forward), np.zeros((2, 3))).item() == 0.0


def test_loss_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        displacement_loss(Tensor(np.zeros((2, 3))), np.zeros((3, 3)))


# ----------------- SAMPLING -----------------
def test_posterior_step_to_the_end_returns_x0(rng):
    s = make_schedule(100)
    x_t, x0 = rng.standard_normal((3, F)), rng.standard_normal((3, F))
    out = posterior_step(x_t, x0, 5, -1, s, rng.standard_normal((3, F)))
    assert np.allclose(out, x0, atol=1e-12)


def test_sample_egomotion_with_identity_model_returns_noise(rng):
    past = rng.standard_normal((4, F))
    out = sample_egomotion(lambda z, t: z, past, 3, seed=11, schedule=make_schedule(100))
    assert out.shape == (3, F)
    assert np.array_equal(out, np.random.default_rng(11).standard_normal((3, F)))


def test_sample_htp_keeps_past_anchored(rng):
    s = make_schedule(50)
    past = rng.standard_normal((4, F))
    ego = rng.standard_normal((7, F))
    seen = []

    def hmtm(z, t, ego_pf, x_vox, n_past):
        return Tensor(0.5 * z.data + 0.1 * ego_pf.data)

    out = sample_htp(hmtm, past, ego, None, 3, k=5, seed=2, schedule=s,
                     on_step=lambda i, z: seen.append(z.past().data.copy()))
    assert out.shape == (3, F)
    assert len(seen) == 5
    assert all(np.array_equal(p, past) for p in seen)


def _random_case(seed):
    rng = np.random.default_rng(seed)
    n_past, n_future, f = (int(v) for v in rng.integers(1, 7, size=3))
    return rng, n_past, n_future, f


@pytest.mark.parametrize("block", range(4))
def test_q_sample_keeps_past_bit_identical_over_random_cases(block):
    s = make_schedule(200)
    for seed in range(block * 250, (block + 1) * 250):
        rng, n_past, n_future, f = _random_case(seed)
        z = rng.standard_normal((n_past + n_future, f)) * rng.uniform(0.1, 10.0)
        t = int(rng.integers(0, s.T))
        zt = q_sample_partial(LatentSeq(z=Tensor(z), anchor_len=n_past), t, rng.standard_normal((n_future, f)), s)
        assert np.array_equal(zt.z.data[:n_past], z[:n_past])


@pytest.mark.parametrize("block", range(4))
def test_sample_htp_keeps_past_bit_identical_over_random_cases(block):
    s = make_schedule(50)
    for seed in range(block * 250, (block + 1) * 250):
        rng, n_past, n_future, f = _random_case(seed)
        past = rng.standard_normal((n_past, f))
        ego = rng.standard_normal((n_past + n_future, f))
        gain = rng.uniform(-2.0, 2.0)
        k = int(rng.integers(1, 9))
        seen = []

        def hmtm(z, t, ego_pf, x_vox, n):
            return Tensor(gain * np.tanh(z.data) + 0.1 * ego_pf.data)

        sample_htp(hmtm, past, ego, None, n_future, k=k, seed=seed, schedule=s,
                   on_step=lambda i, z: seen.append(z.past().data.copy()))
        assert len(seen) == k
        assert all(np.array_equal(p, past) for p in seen)


def test_sample_htp_single_step_returns_prediction(rng):
    target = rng.standard_normal((7, F))
    out = sample_htp(lambda z, t, e, v, n: Tensor(target), rng.standard_normal((4, F)), np.zeros((7, F)), None, 3,
                     k=1, seed=0, schedule=make_schedule(50))
    assert np.array_equal(out, target[4:])


def test_sample_htp_is_deterministic(rng):
    s = make_schedule(50)
    past, ego = rng.standard_normal((4, F)), rng.standard_normal((7, F))

    def hmtm(z, t, ego_pf, x_vox, n_past):
        return Tensor(np.tanh(z.data) + 0.1 * ego_pf.data)

    a = sample_htp(hmtm, past, ego, None, 3, k=10, seed=[5, 1], schedule=s)
    b = sample_htp(hmtm, past, ego, None, 3, k=10, seed=[5, 1], schedule=s)
    c = sample_htp(hmtm, past, ego, None, 3, k=10, seed=[6, 1], schedule=s)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_htp_needs_full_egomotion_condition(rng):
    with pytest.raises(ShapeMismatch):
        sample_htp(lambda *a: a[0], rng.standard_normal((4, F)), np.zeros((5, F)), None, 3, k=1, seed=0,
                   schedule=make_schedule(10))
