import argparse


def setup_handlers(subparsers) -> None:
    """Connecting all subcommands."""
    from . import ablate, evaluate, gradcheck, synth, train

    synth.register(subparsers)
    train.register(subparsers)
    evaluate.register(subparsers)
    ablate.register(subparsers)
    gradcheck.register(subparsers)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htp-engine", description="Twin-diffusion 3D hand trajectory prediction")
    subparsers = parser.add_subparsers(dest="command", required=True)
    setup_handlers(subparsers)
    return parser
