import pytest
import yaml

from conftest import TINY_OVERLAY, _merge
from main import main
from src.presentation.report_csv import read_csv


def _write_config(path, root, extra=None):
    overlay = _merge(TINY_OVERLAY, {"data": {"root": str(root)}})
    path.write_text(yaml.safe_dump(_merge(overlay, extra or {})), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def run(tmp_path_factory):
    """One synth → train → eval pass shared by the tests below."""
    base = tmp_path_factory.mktemp("cli")
    cfg = _write_config(base / "run.yaml", base / "data")
    codes = {
        "synth": main(["synth", "--config", str(cfg)]),
        "train": main(["train", "--config", str(cfg), "--out", str(base / "train")]),
    }
    ckpt = base / "train" / "checkpoints" / "latest.npz"
    for name in ("eval", "eval_again"):
        codes[name] = main(["eval", "--config", str(cfg), "--out", str(base / name), "--checkpoint", str(ckpt)])
    return base, cfg, ckpt, codes


def test_pipeline_exit_codes(run):
    _, _, _, codes = run
    assert codes == {"synth": 0, "train": 0, "eval": 0, "eval_again": 0}


def test_synth_writes_dataset(run):
    base, *_ = run
    assert (base / "data" / "manifest.json").exists()
    assert len(list((base / "data" / "train").glob("*.htpseq"))) == 4
    assert len(list((base / "data" / "test").glob("*.htpseq"))) == 2


def test_train_writes_curve_and_checkpoints(run):
    base, _, ckpt, _ = run
    assert ckpt.exists()
    assert [r["epoch"] for r in read_csv(base / "train" / "loss_curve.csv")] == ["1", "2"]
    assert not (base / "train" / ".lock").exists()


def test_eval_writes_reports(run):
    base, *_ = run
    out = base / "eval"
    for name in ("model", "cvh", "constant"):
        rows = read_csv(out / f"report_{name}.csv")
        assert list(rows[0]) == ["sequence_id", "ade3d", "fde3d", "ade2d", "fde2d"]
        assert [r["sequence_id"] for r in rows] == ["test-00000", "test-00001", "mean"]
    summary = read_csv(out / "summary.csv")
    assert [r["predictor"] for r in summary] == ["model", "cvh", "constant"]
    assert (out / "plots" / "test-00000.svg").exists()


def test_eval_is_reproducible(run):
    base, *_ = run
    for name in ("report_model.csv", "report_cvh.csv", "summary.csv"):
        assert (base / "eval" / name).read_bytes() == (base / "eval_again" / name).read_bytes()


def test_resume_when_already_finished(run, capsys):
    base, cfg, _, _ = run
    assert main(["train", "--config", str(cfg), "--out", str(base / "train"), "--resume"]) == 0
    assert "nothing to do" in capsys.readouterr().out


def test_eval_rejects_checkpoint_of_another_config(run, capsys):
    base, _, ckpt, _ = run
    other = _write_config(base / "other.yaml", base / "data", {"model": {"pattern": "SAT-EAM"}})
    code = main(["eval", "--config", str(other), "--out", str(base / "eval_other"), "--checkpoint", str(ckpt)])
    assert code == 2
    assert "CheckpointMismatch" in capsys.readouterr().err


def test_locked_output_directory(run, capsys):
    base, cfg, _, _ = run
    locked = base / "locked"
    locked.mkdir()
    (locked / ".lock").write_text("123", encoding="utf-8")
    assert main(["train", "--config", str(cfg), "--out", str(locked)]) == 2
    assert "OutputLocked" in capsys.readouterr().err


def test_missing_dataset_names_the_path(tmp_path, capsys):
    cfg = _write_config(tmp_path / "run.yaml", tmp_path / "no_data_here")
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "train")]) == 2
    err = capsys.readouterr().err
    assert "DatasetIoError" in err and "no_data_here" in err


def test_bad_config_file(tmp_path, capsys):
    assert main(["synth", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert "ConfigError" in capsys.readouterr().err


def test_gradcheck_passes(capsys):
    assert main(["gradcheck"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_unknown_sweep_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["ablate", "--sweep", "optimizers"])
    assert exc.value.code == 2


@pytest.mark.slow
def test_desk_benchmark_beats_cvh(tmp_path):
    cfg = tmp_path / "desk.yaml"
    cfg.write_text(yaml.safe_dump({"preset": "desk", "data": {"root": str(tmp_path / "data")}}), encoding="utf-8")
    assert main(["synth", "--config", str(cfg)]) == 0
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "train")]) == 0
    ckpt = tmp_path / "train" / "checkpoints" / "latest.npz"
    assert main(["eval", "--config", str(cfg), "--out", str(tmp_path / "eval"), "--checkpoint", str(ckpt)]) == 0

    summary = {r["predictor"]: r for r in read_csv(tmp_path / "eval" / "summary.csv")}
    assert float(summary["model"]["ade3d"]) <= 0.8 * float(summary["cvh"]["ade3d"])
