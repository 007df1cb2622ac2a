import argparse
import logging

from src.denoisers.gradients import gradient_suite
from src.routes.core import echo

logger = logging.getLogger(__name__)


def cmd_gradcheck(args: argparse.Namespace) -> int:
    """Nonzero exit when any analytic gradient disagrees with central differences."""
    reports = gradient_suite(seed=args.seed if args.seed is not None else 0)
    lines = [
        f"{'ok ' if r.passed else 'FAIL'} {r.name:<22} rel={r.max_rel_error:.2e} abs={r.max_abs_error:.2e} n={r.checked}"
        for r in reports
    ]
    failed = sum(not r.passed for r in reports)
    echo("\n".join(lines + [f"{len(reports) - failed}/{len(reports)} passed"]), header="gradcheck")
    logger.info("Gradcheck | passed=%d | failed=%d", len(reports) - failed, failed)
    return 1 if failed else 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("gradcheck", help="finite-difference gradient suite")
    parser.add_argument("--seed", type=int, default=None)
    parser.set_defaults(handler=cmd_gradcheck)
