import argparse
import logging

from src.data.dataset import load_dataset
from src.diffusion.model import TwinModel
from src.diffusion.training import Trainer
from src.routes.core import TRAIN_DIR, add_common_flags, data_root, echo, load_config, output_dir, prepare_examples
from src.utils.lock import OutputLock

logger = logging.getLogger(__name__)


def cmd_train(args: argparse.Namespace) -> int:
    """Trains both diffusions; loss_curve.csv and checkpoints land in the output directory."""
    cfg = load_config(args)
    out = output_dir(args, TRAIN_DIR)
    train = prepare_examples(cfg, load_dataset(data_root(cfg), "train"), training=True)

    with OutputLock(out):
        model = TwinModel(cfg)
        trainer = Trainer(cfg, model, train, out)
        if args.resume:
            trainer.resume()
        rows = trainer.run()
        path = trainer.ckpt_dir / f"epoch_{trainer.epoch:04d}.npz" if rows else trainer.save()

    if rows:
        echo(f"epochs: {rows[0]['epoch']}..{rows[-1]['epoch']}\n"
             f"loss: {rows[0]['total']:.5f} -> {rows[-1]['total']:.5f}\n"
             f"checkpoint: {path}", header="train")
    else:
        echo(f"nothing to do, already at epoch {trainer.epoch}\ncheckpoint: {path}", header="train")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="train the twin diffusion models")
    add_common_flags(parser)
    parser.add_argument("--resume", action="store_true", help="continue from checkpoints/latest.npz")
    parser.set_defaults(handler=cmd_train)
