import logging
import os
from pathlib import Path

from src.errors import OutputLocked

logger = logging.getLogger(__name__)

LOCK_NAME = ".lock"


class OutputLock:
    """Exclusive writer lock on an output directory (`<dir>/.lock`, created with O_EXCL)."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.path = self.directory / LOCK_NAME
        self._held = False

    def acquire(self) -> "OutputLock":
        self.directory.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as e:
            raise OutputLocked(f"output directory {self.directory} is locked by another writer ({self.path})") from e
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        self._held = True
        logger.debug("Lock acquired | path=%s", self.path)
        return self

    def release(self) -> None:
        if self._held:
            self.path.unlink(missing_ok=True)
            self._held = False

    def __enter__(self) -> "OutputLock":
        return self.acquire()

    def __exit__(self, *exc) -> None:
        self.release()
