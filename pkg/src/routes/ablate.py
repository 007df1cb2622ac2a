import argparse
import logging

from src.data.dataset import load_dataset
from src.eval.ablation import SWEEPS, run_ablation
from src.routes.core import ABLATE_DIR, add_common_flags, data_root, echo, load_config, output_dir
from src.utils.lock import OutputLock

logger = logging.getLogger(__name__)


def cmd_ablate(args: argparse.Namespace) -> int:
    """Trains and scores every variant of one sweep; `<out>/<sweep>/summary.csv`."""
    cfg = load_config(args)
    out = output_dir(args, ABLATE_DIR)
    root = data_root(cfg)
    train_seqs, test_seqs = load_dataset(root, "train"), load_dataset(root, "test")

    with OutputLock(out):
        rows = run_ablation(cfg, args.sweep, train_seqs, test_seqs, out)

    lines = [f"{r['variant']:>14}: ade3d={r['ade3d']:.4f} fde3d={r['fde3d']:.4f}" for r in rows]
    echo("\n".join(lines + [f"summary: {out / args.sweep / 'summary.csv'}"]), header=f"ablate {args.sweep}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("ablate", help="run an ablation sweep")
    add_common_flags(parser)
    parser.add_argument("--sweep", choices=SWEEPS, required=True)
    parser.set_defaults(handler=cmd_ablate)
