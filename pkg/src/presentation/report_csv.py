import csv
import math
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

LOSS_COLUMNS = ("epoch", "total", "l_vlb_ego", "l_vlb_htp", "l_dis", "l_reg", "l_angle")
SUMMARY_COLUMNS = ("sweep", "variant", "label", "ade3d", "fde3d", "ade2d", "fde2d", "excluded_2d")


def _cell(value) -> object:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return value


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Dict[str, object]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(v) for k, v in row.items()})
    return path


def append_csv_row(path: Path, columns: Sequence[str], row: Dict[str, object]) -> Path:
    """Appends one row, writing the header first when the file is new."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        if fresh:
            w.writeheader()
        w.writerow({k: _cell(v) for k, v in row.items()})
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def truncate_after_epoch(path: Path, epoch: int) -> None:
    """Drops loss-curve rows newer than a resumed checkpoint."""
    path = Path(path)
    if not path.exists():
        return
    rows = [r for r in read_csv(path) if int(r["epoch"]) <= epoch]
    write_csv(path, LOSS_COLUMNS, rows)
