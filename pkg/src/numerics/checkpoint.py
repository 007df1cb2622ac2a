import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.errors import DatasetIoError, FormatError

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

_META_KEY = "__meta__"


def save_checkpoint(
    path: Path,
    params: Dict[str, np.ndarray],
    optimizer_state: Optional[Dict[str, np.ndarray]] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Writes named float32 parameters (`param/<name>`), optimizer arrays
    (`optim/<key>`) and a JSON metadata entry into one `.npz` archive.
    The archive is written next to the target and renamed into place.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays: Dict[str, np.ndarray] = {}
    for name, value in params.items():
        arrays[f"param/{name}"] = np.asarray(value, dtype=np.float32)
    for key, value in (optimizer_state or {}).items():
        value = np.asarray(value)
        arrays[f"optim/{key}"] = value.astype(np.float32) if value.dtype.kind == "f" else value
    payload = {"version": CHECKPOINT_VERSION, **(meta or {})}
    arrays[_META_KEY] = np.frombuffer(json.dumps(payload, sort_keys=True).encode("utf-8"), dtype=np.uint8)

    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, **arrays)
    tmp.replace(path)
    logger.info("Checkpoint saved | path=%s | params=%d | epoch=%s", path, len(params), payload.get("epoch"))
    return path


def load_checkpoint(path: Path) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray], Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        raise DatasetIoError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            files = {k: archive[k] for k in archive.files}
    except (OSError, ValueError) as e:
        raise FormatError(f"unreadable checkpoint {path}: {e}") from e
    if _META_KEY not in files:
        raise FormatError(f"checkpoint {path} has no metadata entry")

    meta = json.loads(files.pop(_META_KEY).tobytes().decode("utf-8"))
    if meta.get("version") != CHECKPOINT_VERSION:
        raise FormatError(f"checkpoint version {meta.get('version')} != supported {CHECKPOINT_VERSION}")
    params = {k[len("param/"):]: v for k, v in files.items() if k.startswith("param/")}
    optim = {k[len("optim/"):]: v for k, v in files.items() if k.startswith("optim/")}
    logger.info("Checkpoint loaded | path=%s | params=%d | epoch=%s", path, len(params), meta.get("epoch"))
    return params, optim, meta
