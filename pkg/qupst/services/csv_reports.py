"""CSV report writing shared by training, evaluation and benchmarking."""

import csv
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from qupst.errors import IoError

logger = logging.getLogger(__name__)


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    logger.debug("Wrote %s", path)
    return path


def write_models(path: Path | str, records: Sequence[Any], fields: Sequence[str]) -> Path:
    """One row per pydantic record, columns in ``fields`` order."""
    return write_csv(path, fields, ([getattr(r, name) for name in fields] for r in records))
