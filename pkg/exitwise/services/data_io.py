from __future__ import annotations

import datetime
import json
import logging
from typing import Any, Dict, IO, Iterable, List, Sequence

import numpy as np
import pandas as pd

from .. import __version__
from ..errors import InvalidParameter

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class CsvRowWriter:
    """Writes rows in chunks; the header goes out with the first chunk only."""

    def __init__(self, out: IO[str], columns: Sequence[str]):
        self.out = out
        self.columns = list(columns)
        self.rows_written = 0
        self._header_done = False

    def write(self, rows: List[Dict[str, Any]]):
        if not rows and self._header_done:
            return
        frame = pd.DataFrame(rows, columns=self.columns)
        frame.to_csv(self.out, header=not self._header_done, index=False, float_format=FLOAT_FORMAT,
                     lineterminator="\n")
        self._header_done = True
        self.rows_written += len(rows)
        self.out.flush()


def write_csv_rows(out: IO[str], columns: Sequence[str], rows: Iterable[Dict[str, Any]],
                   chunk: int = 1024) -> int:
    writer = CsvRowWriter(out, columns)
    pending: List[Dict[str, Any]] = []
    for row in rows:
        pending.append(row)
        if len(pending) >= chunk:
            writer.write(pending)
            pending = []
    writer.write(pending)
    return writer.rows_written


def histogram(samples, bins: int) -> pd.DataFrame:
    """Histogram with density normalised so that sum(density * width) == 1."""
    if bins < 2:
        raise InvalidParameter(f"bins must be >= 2, got {bins}")
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise InvalidParameter("cannot build a histogram of an empty sample")
    counts, edges = np.histogram(arr, bins=bins)
    width = np.diff(edges)
    return pd.DataFrame({
        "bin_left": edges[:-1],
        "bin_right": edges[1:],
        "count": counts,
        "density": counts / (arr.size * width),
    })


def write_histogram(path: str, samples, bins: int) -> pd.DataFrame:
    frame = histogram(samples, bins)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"histogram with {bins} bins written to {path}")
    return frame


def describe(values) -> Dict[str, float]:
    series = pd.Series(np.asarray(values, dtype=float))
    if series.empty:
        return {"count": 0}
    return {
        "count": int(series.size),
        "mean": float(series.mean()),
        "std": float(series.std(ddof=1)) if series.size > 1 else 0.0,
        "min": float(series.min()),
        "max": float(series.max()),
    }


def build_summary(command: str, config: Dict[str, Any], columns: Dict[str, Sequence[float]],
                  wall_time: float, extra: Dict[str, Any] | None = None) -> Dict[str, Any]:
    summary = {
        "version": __version__,
        "command": command,
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config,
        "wall_time_s": wall_time,
        "statistics": {name: describe(vals) for name, vals in columns.items()},
    }
    if extra:
        summary.update(extra)
    return summary


def write_json(payload: Dict[str, Any], out: IO[str]):
    json.dump(payload, out, indent=2, default=_json_default)
    out.write("\n")


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)
