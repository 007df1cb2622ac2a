import math

import numpy as np
import pytest

from src.config import build_config
from src.data import dataset_intrinsics, prepare_example, synth_scene, synth_sequence
from src.diffusion import LATEST, Trainer, TwinModel, load_model, train_step
from src.encoders import SyntheticProvider
from src.errors import CheckpointMismatch, DatasetIoError
from src.numerics import AdamW
from src.presentation.report_csv import read_csv


def _examples(cfg, sequences, training=True):
    provider = SyntheticProvider(seed=cfg.provider.seed, dim=cfg.model.x)
    return [prepare_example(s, cfg, provider, training=training) for s in sequences]


def _params(model):
    return {k: v.copy() for k, v in model.state_dict().items()}


def _single_example(cfg, training=True):
    """One min-jerk sequence at the data settings of `cfg`."""
    d = cfg.data
    seq = synth_sequence(synth_scene(0), "neutral", d.n_past, d.n_future, seed=0, intrinsics=dataset_intrinsics(d))
    return _examples(cfg, [seq], training=training)[0]


# ----------------- TRAIN STEP -----------------
def test_train_step_losses_are_finite(tiny_cfg, tiny_sequences):
    model = TwinModel(tiny_cfg)
    losses = train_step(model, _examples(tiny_cfg, tiny_sequences[:2]), AdamW(model.named_parameters()), seed=0)
    values = losses.values()
    assert all(math.isfinite(v) and v >= 0 for v in values.values())
    assert values["l_vlb_ego"] > 0


def test_train_step_without_egomotion(make_cfg, tiny_sequences):
    cfg = make_cfg({"egomotion_mode": "none"})
    model = TwinModel(cfg)
    assert model.vm is None and not model.uses_egomotion_diffusion
    losses = train_step(model, _examples(cfg, tiny_sequences[:2]), AdamW(model.named_parameters()), seed=0)
    assert losses.l_vlb_ego.item() == 0.0


def test_train_step_with_se3_poses(make_cfg, tiny_sequences):
    cfg = make_cfg({"egomotion_mode": "se3", "modalities": {"point_clouds": False}})
    model = TwinModel(cfg)
    assert model.voxel_encoder is None
    losses = train_step(model, _examples(cfg, tiny_sequences[:2]), AdamW(model.named_parameters()), seed=1)
    assert math.isfinite(losses.total.item())


def test_train_step_is_deterministic(tiny_cfg, tiny_sequences):
    batch = _examples(tiny_cfg, tiny_sequences[:2])
    a, b = TwinModel(tiny_cfg), TwinModel(tiny_cfg)
    train_step(a, batch, AdamW(a.named_parameters(), lr=1e-3), seed=4)
    train_step(b, batch, AdamW(b.named_parameters(), lr=1e-3), seed=4)
    pa, pb = _params(a), _params(b)
    assert all(np.array_equal(pa[k], pb[k]) for k in pa)


def test_repeated_steps_reduce_the_loss(make_cfg, tiny_sequences):
    cfg = make_cfg({"train": {"lr": 3e-3}})
    model = TwinModel(cfg)
    batch = _examples(cfg, tiny_sequences[:1])
    opt = AdamW(model.named_parameters(), lr=cfg.train.lr, weight_decay=0.0)
    first = train_step(model, batch, opt, seed=0).values()
    for _ in range(40):
        last = train_step(model, batch, opt, seed=0).values()
    assert last["total"] < first["total"]
    assert last["l_dis"] < first["l_dis"]


def test_desk_model_overfits_one_sequence():
    cfg = build_config()
    model = TwinModel(cfg)
    batch = [_single_example(cfg)]
    opt = AdamW(model.named_parameters(), lr=cfg.train.lr, weight_decay=0.0)
    l_dis = [
        train_step(model, batch, opt, cfg.loss_weights, seed=step, grad_clip=cfg.train.grad_clip).l_dis.item()
        for step in range(200)
    ]
    # the per-step curve is noisy; the bar is reaching 10% of the start within the run
    assert min(l_dis[1:]) <= 0.1 * l_dis[0]


# ----------------- TRAINER / CHECKPOINTS -----------------
def test_trainer_writes_curve_and_checkpoints(tmp_path, tiny_cfg, tiny_sequences):
    trainer = Trainer(tiny_cfg, TwinModel(tiny_cfg), _examples(tiny_cfg, tiny_sequences), tmp_path / "run")
    rows = trainer.run()
    assert [r["epoch"] for r in rows] == [1, 2]
    assert (trainer.ckpt_dir / "epoch_0001.npz").exists()
    assert (trainer.ckpt_dir / LATEST).exists()
    assert [r["epoch"] for r in read_csv(trainer.loss_csv)] == ["1", "2"]


def test_resume_continues_the_same_run(tmp_path, tiny_cfg, tiny_sequences):
    examples = _examples(tiny_cfg, tiny_sequences)

    straight = Trainer(tiny_cfg, TwinModel(tiny_cfg), examples, tmp_path / "straight")
    straight.run(epochs=2)

    first = Trainer(tiny_cfg, TwinModel(tiny_cfg), examples, tmp_path / "resumed")
    first.run(epochs=1)
    second = Trainer(tiny_cfg, TwinModel(tiny_cfg, seed=99), examples, tmp_path / "resumed")
    assert second.resume() == 1
    second.run(epochs=2)

    pa, pb = _params(straight.model), _params(second.model)
    assert all(np.allclose(pa[k], pb[k], rtol=1e-5, atol=1e-7) for k in pa)
    curve_a, curve_b = read_csv(straight.loss_csv), read_csv(second.loss_csv)
    assert len(curve_b) == 2
    assert float(curve_b[-1]["total"]) == pytest.approx(float(curve_a[-1]["total"]), rel=1e-5)


def test_resume_rejects_a_different_config(tmp_path, tiny_cfg, make_cfg, tiny_sequences):
    examples = _examples(tiny_cfg, tiny_sequences)
    Trainer(tiny_cfg, TwinModel(tiny_cfg), examples, tmp_path / "run").run(epochs=1)

    other = make_cfg({"model": {"pattern": "SAT-EAM"}})
    with pytest.raises(CheckpointMismatch):
        Trainer(other, TwinModel(other), examples, tmp_path / "run").resume()
    with pytest.raises(CheckpointMismatch):
        load_model(other, tmp_path / "run" / "checkpoints" / LATEST)


def test_load_model_restores_predictions(tmp_path, tiny_cfg, tiny_sequences):
    trainer = Trainer(tiny_cfg, TwinModel(tiny_cfg), _examples(tiny_cfg, tiny_sequences), tmp_path / "run")
    trainer.run(epochs=1)
    loaded = load_model(tiny_cfg, trainer.ckpt_dir / LATEST)
    example = _examples(tiny_cfg, tiny_sequences[3:], training=False)[0]
    a = trainer.model.predict(example, seed=5)
    b = loaded.predict(example, seed=5)
    assert a.shape == (example.n_future, 3)
    assert np.allclose(a, b, rtol=1e-5, atol=1e-6)


def test_load_model_missing_checkpoint(tmp_path, tiny_cfg):
    with pytest.raises(DatasetIoError):
        load_model(tiny_cfg, tmp_path / "missing.npz")


# ----------------- INFERENCE -----------------
def test_predict_is_deterministic(tiny_cfg, tiny_sequences):
    model = TwinModel(tiny_cfg)
    example = _examples(tiny_cfg, tiny_sequences[:1], training=False)[0]
    a, b = model.predict(example, seed=3), model.predict(example, seed=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, model.predict(example, seed=4))


def test_paper_preset_runs_one_sampling_pass():
    cfg = build_config(preset="paper")
    model = TwinModel(cfg)
    assert model.cfg.model.f == 1024 and model.cfg.model.sat.d_ffn == 2048
    example = _single_example(cfg, training=False)
    out = model.predict(example, seed=0)
    assert out.shape == (example.n_future, 3)
    assert np.isfinite(out).all()
