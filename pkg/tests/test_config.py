from pathlib import Path

import pytest

from src.config import build_config, config_hash, load_run_config, with_overrides
from src.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_desk_defaults():
    cfg = build_config()
    assert cfg.preset == "desk"
    assert (cfg.data.n_past, cfg.data.n_future) == (12, 8)
    assert cfg.model.f == 128 and cfg.schedule.T == 1000 and cfg.schedule.k_htp == 100
    assert cfg.model.sat.d_ffn == 2 * cfg.model.f


def test_paper_preset_validates():
    cfg = build_config(preset="paper")
    assert cfg.model.f == 1024
    assert (cfg.schedule.T, cfg.schedule.k_ego, cfg.schedule.k_htp) == (1000, 1, 100)
    assert cfg.model.pattern == "EAM-EAM-SAT"
    assert (cfg.model.eam.d_state, cfg.model.eam.d_conv, cfg.model.eam.expand) == (16, 2, 1)
    assert (cfg.model.sat.n_head, cfg.model.sat.d_ffn) == (4, 2048)
    assert cfg.model.sat.d_ffn == 2 * cfg.model.f
    assert cfg.model.voxel_dims == (20, 20, 20) and cfg.model.voxel_resolution == 0.05
    assert cfg.data.split_ratio == 0.6


@pytest.mark.parametrize(
    "overlay",
    [
        {"model": {"f": 30, "sat": {"n_head": 4}}},
        {"model": {"pattern": "EAM-XYZ"}},
        {"schedule": {"T": 10, "k_htp": 11}},
        {"schedule": {"k_ego": 0}},
        {"loss_weights": {"dis": -1.0}},
        {"modalities": {"waypoints": False}},
        {"egomotion_mode": "imu"},
        {"data": {"mode_mix": {"tail_leads": 1.0}}},
    ],
)
def test_invalid_overlays_are_rejected(overlay):
    with pytest.raises(ConfigError):
        build_config(overlay)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        build_config(preset="cloud")


def test_shipped_configs_load():
    for name in ("desk", "paper", "smoke"):
        cfg = load_run_config(CONFIGS / f"{name}.yaml")
        assert cfg.preset == ("paper" if name == "paper" else "desk")
    assert load_run_config(CONFIGS / "smoke.yaml").model.f == 16


def test_yaml_with_seed_and_preset_override(config_file):
    path = config_file({"train": {"seed": 3}})
    assert load_run_config(path).train.seed == 3
    assert load_run_config(path, seed=9).train.seed == 9
    assert load_run_config(path, preset="paper").preset == "paper"


def test_missing_or_broken_config(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "nope.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(broken)


def test_config_hash_tracks_model_shape(tiny_cfg):
    assert config_hash(tiny_cfg) == config_hash(build_config(tiny_cfg.model_dump(mode="json")))
    assert config_hash(with_overrides(tiny_cfg, {"train": {"epochs": 50, "seed": 4}})) == config_hash(tiny_cfg)
    assert config_hash(with_overrides(tiny_cfg, {"model": {"pattern": "SAT-EAM"}})) != config_hash(tiny_cfg)
    assert config_hash(with_overrides(tiny_cfg, {"egomotion_mode": "none"})) != config_hash(tiny_cfg)


def test_with_overrides_validates(tiny_cfg):
    cfg = with_overrides(tiny_cfg, {"modalities": {"images": False}})
    assert not cfg.modalities.images and cfg.modalities.text
    assert tiny_cfg.modalities.images
    with pytest.raises(ConfigError):
        with_overrides(tiny_cfg, {"model": {"pattern": "MLP"}})
