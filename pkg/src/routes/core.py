import argparse
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from src.config import PRESETS, RunConfig, load_run_config, settings
from src.data.examples import Example, prepare_example
from src.data.sequence import Sequence as HandSequence
from src.encoders import provider_from_config

logger = logging.getLogger(__name__)

TRAIN_DIR = "train"
EVAL_DIR = "eval"
ABLATE_DIR = "ablate"


def add_common_flags(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    """Flags shared by every subcommand."""
    parser.add_argument("--config", type=Path, default=None, help="YAML run configuration")
    parser.add_argument("--preset", choices=PRESETS, default=None, help="base preset")
    parser.add_argument("--seed", type=int, default=None, help="training seed override")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(args.config, preset=args.preset, seed=args.seed)


def output_dir(args: argparse.Namespace, default: str) -> Path:
    """`--out` if given, otherwise `<runs_dir>/<default>`."""
    return Path(args.out) if args.out is not None else Path(settings.runs_dir) / default


def data_root(cfg: RunConfig) -> Path:
    return Path(cfg.data.root)


def prepare_examples(cfg: RunConfig, sequences: Sequence[HandSequence], training: bool) -> List[Example]:
    provider = provider_from_config(cfg)
    return [prepare_example(s, cfg, provider, training=training) for s in sequences]


def echo(text: str, header: Optional[str] = None) -> None:
    """Human-readable command result on stdout; logs go to engine.log."""
    if header:
        print(f"== {header} ==")
    print(text)
