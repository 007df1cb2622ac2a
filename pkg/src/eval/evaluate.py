import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.config import settings
from src.data.examples import Example
from src.eval.metrics import ade, fde, finite_mean, metrics_2d, to_2d_normalized
from src.eval.predictors import Predictor

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ("ade3d", "fde3d", "ade2d", "fde2d")
CSV_COLUMNS = ("sequence_id",) + METRIC_COLUMNS


@dataclass
class SequenceMetrics:
    sequence_id: str
    ade3d: float
    fde3d: float
    ade2d: float
    fde2d: float
    excluded_2d: int = 0

    def as_row(self) -> Dict[str, object]:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


@dataclass
class MetricReport:
    model: str
    config_hash: Optional[str] = None
    rows: List[SequenceMetrics] = field(default_factory=list)
    predictions: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def aggregates(self) -> Dict[str, float]:
        """Arithmetic means over sequences; 2D means skip sequences without a valid pair."""
        return {c: finite_mean([getattr(r, c) for r in self.rows]) for c in METRIC_COLUMNS}

    @property
    def excluded_2d(self) -> int:
        return int(sum(r.excluded_2d for r in self.rows))

    def to_rows(self) -> List[Dict[str, object]]:
        out = [r.as_row() for r in self.rows]
        out.append({"sequence_id": "mean", **self.aggregates})
        return out


def score_sequence(example: Example, pred: np.ndarray) -> SequenceMetrics:
    seq = example.sequence
    gt = example.future_waypoints
    pred = np.asarray(pred, dtype=np.float64).reshape(gt.shape)
    poses = [seq.camera_from_global(k) for k in range(seq.n_past, seq.n_frames)]
    pred_2d, pred_ok = to_2d_normalized(pred, seq.intrinsics, poses)
    gt_2d, gt_ok = to_2d_normalized(gt, seq.intrinsics, poses)
    ade2d, fde2d, excluded = metrics_2d(pred_2d, pred_ok, gt_2d, gt_ok)
    return SequenceMetrics(
        sequence_id=seq.id,
        ade3d=ade(pred, gt),
        fde3d=fde(pred, gt),
        ade2d=ade2d,
        fde2d=fde2d,
        excluded_2d=excluded,
    )


def evaluate(
    predictor: Predictor,
    examples: Sequence[Example],
    config_hash: Optional[str] = None,
) -> MetricReport:
    """Runs the predictor over every test example and scores 3D and normalized 2D ADE/FDE."""
    report = MetricReport(model=predictor.name, config_hash=config_hash)
    for ex in tqdm(examples, desc=f"eval {predictor.name}", disable=not settings.show_progress):
        pred = predictor.predict(ex)
        report.predictions[ex.id] = np.asarray(pred, dtype=np.float64)
        report.rows.append(score_sequence(ex, pred))
    agg = report.aggregates
    logger.info(
        "Eval %s | n=%d | ade3d=%.4f | fde3d=%.4f | ade2d=%.4f | fde2d=%.4f | excluded_2d=%d",
        predictor.name, len(report.rows), agg["ade3d"], agg["fde3d"], agg["ade2d"], agg["fde2d"], report.excluded_2d,
    )
    return report
