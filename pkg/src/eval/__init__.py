from src.eval.ablation import SWEEPS, relative_reduction, run_ablation, run_variant, sweep_variants
from src.eval.baselines import constant_position_baseline, cvh_baseline
from src.eval.evaluate import CSV_COLUMNS, MetricReport, SequenceMetrics, evaluate, score_sequence
from src.eval.metrics import ade, fde, finite_mean, metrics_2d, to_2d_normalized
from src.eval.predictors import (
    ConstantPositionPredictor,
    CVHPredictor,
    ModelPredictor,
    OraclePredictor,
    Predictor,
    make_predictor,
)

__all__ = [
    "CSV_COLUMNS",
    "CVHPredictor",
    "ConstantPositionPredictor",
    "MetricReport",
    "ModelPredictor",
    "OraclePredictor",
    "Predictor",
    "SWEEPS",
    "SequenceMetrics",
    "ade",
    "constant_position_baseline",
    "cvh_baseline",
    "evaluate",
    "fde",
    "finite_mean",
    "make_predictor",
    "metrics_2d",
    "relative_reduction",
    "run_ablation",
    "run_variant",
    "score_sequence",
    "sweep_variants",
    "to_2d_normalized",
]
