import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.config import settings
from src.errors import EngineError
from src.routes import build_parser

# ----------------- LOGGING -----------------
LOG_DIR = Path(settings.log_dir)
if not LOG_DIR.is_absolute():
    LOG_DIR = Path(__file__).resolve().parent / LOG_DIR
LOG_DIR.mkdir(parents=True, exist_ok=True)
LOG_FILE = LOG_DIR / "engine.log"

logging.basicConfig(
    level=getattr(logging, settings.log_level, logging.INFO),
    format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
)

file_handler = logging.FileHandler(LOG_FILE, encoding="utf-8")
file_handler.setLevel(getattr(logging, settings.log_level, logging.INFO))
file_handler.setFormatter(logging.Formatter(
    "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
))
logging.getLogger().addHandler(file_handler)

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        logger.info("Starting %s...", args.command)
        return args.handler(args)
    except EngineError as e:
        logger.exception("%s failed: %s", args.command, e)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception("%s fatal error: %s", args.command, e)
        print(f"fatal: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
