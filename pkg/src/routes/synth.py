import argparse
import logging

from src.config import config_hash
from src.data.dataset import build_dataset
from src.routes.core import add_common_flags, data_root, echo, load_config
from src.utils.lock import OutputLock

logger = logging.getLogger(__name__)


def cmd_synth(args: argparse.Namespace) -> int:
    """Writes the train/test sequence files and the manifest."""
    cfg = load_config(args)
    root = args.out if args.out is not None else data_root(cfg)
    with OutputLock(root):
        manifest = build_dataset(root, cfg.data, config_hash=config_hash(cfg))
    counts = ", ".join(f"{name}={info.count}" for name, info in manifest.splits.items())
    logger.info("Synth done | root=%s | %s", root, counts)
    echo(f"dataset: {root}\nsequences: {counts}\nframes: {manifest.n_frames} "
         f"(past {manifest.n_past}, future {manifest.n_future})", header="synth")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="generate the synthetic dataset")
    add_common_flags(parser)
    parser.set_defaults(handler=cmd_synth)
