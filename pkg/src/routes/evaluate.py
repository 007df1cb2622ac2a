import argparse
import logging
from pathlib import Path
from typing import Dict, List

from src.config import config_hash, settings
from src.data.dataset import load_dataset
from src.diffusion.training import LATEST, load_model
from src.eval.evaluate import CSV_COLUMNS, METRIC_COLUMNS, MetricReport, evaluate
from src.eval.predictors import make_predictor
from src.presentation.report_csv import write_csv
from src.presentation.trajectory_plot import plot_trajectory
from src.routes.core import EVAL_DIR, TRAIN_DIR, add_common_flags, data_root, echo, load_config, output_dir, prepare_examples
from src.utils.lock import OutputLock
from src.utils.translations import tr_predictor

logger = logging.getLogger(__name__)

SUMMARY_NAME = "summary.csv"
EVAL_SUMMARY_COLUMNS = ("predictor", "label") + METRIC_COLUMNS + ("excluded_2d",)


def _predictor_names(configured) -> List[str]:
    names = list(dict.fromkeys(configured))
    if "cvh" not in names:
        names.append("cvh")
    return names


def cmd_eval(args: argparse.Namespace) -> int:
    """Scores the trained model and the baselines on the test split; CSV per predictor plus SVG plots."""
    cfg = load_config(args)
    out = output_dir(args, EVAL_DIR)
    checkpoint = args.checkpoint or Path(settings.runs_dir) / TRAIN_DIR / "checkpoints" / LATEST
    names = _predictor_names(cfg.eval.predictors)
    model = load_model(cfg, checkpoint) if "model" in names else None
    test = prepare_examples(cfg, load_dataset(data_root(cfg), "test"), training=False)
    h = config_hash(cfg)

    reports: Dict[str, MetricReport] = {}
    with OutputLock(out):
        for name in names:
            report = evaluate(make_predictor(name, model=model, seed=cfg.eval.seed), test, config_hash=h)
            write_csv(out / f"report_{name}.csv", CSV_COLUMNS, report.to_rows())
            reports[name] = report

        summary = [
            {"predictor": n, "label": tr_predictor(n), **r.aggregates, "excluded_2d": r.excluded_2d}
            for n, r in reports.items()
        ]
        write_csv(out / SUMMARY_NAME, EVAL_SUMMARY_COLUMNS, summary)

        shown = reports.get("model") or reports["cvh"]
        for ex in test[: cfg.eval.plots]:
            plot_trajectory(
                out / "plots" / f"{ex.id}.svg",
                ex.past_waypoints, ex.future_waypoints, shown.predictions[ex.id],
                title=f"{ex.id} ({shown.model})",
            )

    lines = [
        f"{row['predictor']:>9}: ade3d={row['ade3d']:.4f} fde3d={row['fde3d']:.4f} "
        f"ade2d={row['ade2d']:.4f} fde2d={row['fde2d']:.4f}"
        for row in summary
    ]
    echo("\n".join(lines + [f"reports: {out}"]), header="eval")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="evaluate the model and the baselines")
    add_common_flags(parser)
    parser.add_argument("--checkpoint", type=Path, default=None, help="checkpoint .npz (default: latest of train)")
    parser.set_defaults(handler=cmd_eval)
