import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

from src.config import EGOMOTION_MODES, RunConfig, config_hash, with_overrides
from src.data.examples import prepare_example
from src.data.sequence import Sequence as HandSequence
from src.denoisers.pattern import ABLATION_PATTERNS
from src.diffusion.model import TwinModel
from src.diffusion.training import Trainer
from src.encoders import provider_from_config
from src.eval.evaluate import CSV_COLUMNS, METRIC_COLUMNS, MetricReport, evaluate
from src.eval.predictors import ModelPredictor
from src.presentation.report_csv import SUMMARY_COLUMNS, write_csv
from src.utils.translations import tr_variant

logger = logging.getLogger(__name__)

SWEEPS = ("egomotion", "patterns", "modality")
ED_BASELINE = "constant-last"
REDUCTION_COLUMNS = tuple(f"red_{c}" for c in METRIC_COLUMNS)

MODALITY_ROWS: Tuple[Tuple[str, Dict[str, bool]], ...] = (
    ("waypoint", {"images": False, "text": False, "point_clouds": False}),
    ("+image", {"images": True, "text": False, "point_clouds": False}),
    ("+text", {"images": True, "text": True, "point_clouds": False}),
    ("+point_cloud", {"images": True, "text": True, "point_clouds": True}),
)


def sweep_variants(sweep: str) -> List[Tuple[str, Dict[str, Any]]]:
    """(variant key, config overlay) pairs of a sweep."""
    if sweep == "egomotion":
        return [(mode, {"egomotion_mode": mode}) for mode in EGOMOTION_MODES]
    if sweep == "patterns":
        return [(p, {"model": {"pattern": p}}) for p in ABLATION_PATTERNS]
    if sweep == "modality":
        return [(key, {"modalities": mods}) for key, mods in MODALITY_ROWS]
    raise ValueError(f"unknown ablation sweep {sweep!r}; expected one of {SWEEPS}")


def relative_reduction(value: float, baseline: float) -> float:
    """(baseline - value) / baseline; nan when the baseline is zero or undefined."""
    if not math.isfinite(value) or not math.isfinite(baseline) or baseline == 0:
        return float("nan")
    return (baseline - value) / baseline


def run_variant(
    cfg: RunConfig,
    train_seqs: Sequence[HandSequence],
    test_seqs: Sequence[HandSequence],
    out_dir: Path,
) -> MetricReport:
    """Trains one variant for its sanity epochs and evaluates it on the test split."""
    provider = provider_from_config(cfg)
    train = [prepare_example(s, cfg, provider, training=True) for s in train_seqs]
    test = [prepare_example(s, cfg, provider, training=False) for s in test_seqs]
    model = TwinModel(cfg)
    Trainer(cfg, model, train, out_dir).run(epochs=cfg.train.sanity_epochs)
    report = evaluate(ModelPredictor(model, seed=cfg.eval.seed), test, config_hash=config_hash(cfg))
    write_csv(out_dir / "report.csv", CSV_COLUMNS, report.to_rows())
    return report


def run_ablation(
    cfg: RunConfig,
    sweep: str,
    train_seqs: Sequence[HandSequence],
    test_seqs: Sequence[HandSequence],
    out_dir: Path,
) -> List[Dict[str, Any]]:
    """
    Runs every variant of a sweep and writes `<out>/<sweep>/summary.csv`.
    The egomotion sweep also reports the relative error reduction of each
    mode over constant-last.
    """
    out_dir = Path(out_dir) / sweep
    rows: List[Dict[str, Any]] = []
    for key, overlay in sweep_variants(sweep):
        variant_cfg = with_overrides(cfg, overlay)
        logger.info("Ablation variant | sweep=%s | variant=%s", sweep, key)
        report = run_variant(variant_cfg, train_seqs, test_seqs, out_dir / key.replace("+", "plus_"))
        rows.append({
            "sweep": sweep,
            "variant": key,
            "label": tr_variant(sweep, key),
            **report.aggregates,
            "excluded_2d": report.excluded_2d,
        })

    columns = list(SUMMARY_COLUMNS)
    if sweep == "egomotion":
        base = next(r for r in rows if r["variant"] == ED_BASELINE)
        for r in rows:
            for metric, col in zip(METRIC_COLUMNS, REDUCTION_COLUMNS):
                r[col] = relative_reduction(r[metric], base[metric])
        columns += list(REDUCTION_COLUMNS)
    write_csv(out_dir / "summary.csv", columns, rows)
    return rows
