from __future__ import annotations

import argparse
import contextlib
import logging
import math
import sys
import time
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence

from pydantic import BaseModel, Field, ValidationError, model_validator

from ..config import Config
from ..errors import UsageError
from ..services.conditional_position import MIN_TERMS, Interval, SeriesParams
from ..services.data_io import build_summary, write_csv_rows, write_histogram, write_json
from ..services.rng_core import TE_MAX, TE_MIN

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    subcommand: str
    drift: Optional[str] = None
    mu0: float = 1.0
    expr: Optional[str] = None
    a: float = -1.0
    b: float = 1.0
    x: float = 0.0
    t: Optional[float] = None
    algo: Literal["det", "kdet", "gdet"] = "det"
    kappa: Optional[float] = None
    tilted: bool = False
    suite: Optional[str] = None
    n: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0)
    streams: int = Field(default=0, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)
    te: float = Field(default_factory=lambda: Config.T_E)
    tc: float = Field(default_factory=lambda: Config.T_C, gt=0)
    max_terms: int = Field(default_factory=lambda: Config.MAX_TERMS, ge=MIN_TERMS)
    output: Optional[str] = None
    summary: Optional[str] = None
    hist: Optional[str] = None
    bins: int = Field(default_factory=lambda: Config.HIST_BINS, ge=2)
    format: Literal["csv", "json"] = "csv"

    @model_validator(mode="after")
    def _check_ranges(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValueError(f"need finite a < b, got a={self.a}, b={self.b}")
        if self.subcommand != "validate" and not self.a < self.x < self.b:
            raise ValueError(f"x={self.x} must lie strictly inside ({self.a}, {self.b})")
        if not TE_MIN <= self.te <= TE_MAX:
            raise ValueError(f"te={self.te} outside [{TE_MIN:.6f}, {TE_MAX}]")
        if self.t is not None and not (math.isfinite(self.t) and self.t >= 0):
            raise ValueError(f"t must be finite and >= 0, got {self.t}")
        if self.kappa is not None and not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be finite and positive, got {self.kappa}")
        return self

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = {k: v for k, v in vars(args).items() if k != "handler" and v is not None}
        try:
            return cls(**values)
        except ValidationError as e:
            problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                                 for err in e.errors())
            raise UsageError(f"invalid arguments: {problems}") from e

    def interval(self) -> Interval:
        return Interval(self.a, self.b)

    def series_params(self) -> SeriesParams:
        return SeriesParams(t_c=self.tc, t_e=self.te, max_terms=self.max_terms)

    def resolved(self) -> Dict[str, Any]:
        data = self.model_dump()
        data["threads"] = self.threads or Config.THREADS
        data["env"] = Config.as_dict()
        return data


def add_interval_arguments(parser: argparse.ArgumentParser, with_x: bool = True):
    parser.add_argument("--a", type=float, default=-1.0, help="lower end of the interval")
    parser.add_argument("--b", type=float, default=1.0, help="upper end of the interval")
    if with_x:
        parser.add_argument("--x", type=float, default=0.0, help="starting point, a < x < b")


def add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--n", type=int, default=1000, help="number of samples")
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--streams", type=int, default=0, help="stream id of sample 0 (sample i uses streams + i)")
    parser.add_argument("--threads", type=int, help="worker threads (default EXITWISE_THREADS)")
    parser.add_argument("--te", type=float, help="exit-time proposal switch point t_e")
    parser.add_argument("--tc", type=float, help="series switch time t_c")
    parser.add_argument("--max-terms", dest="max_terms", type=int, help="series term budget per candidate")
    parser.add_argument("--output", help="write rows here instead of stdout")
    parser.add_argument("--summary", help="summary JSON path (default <output>.summary.json, or stderr)")
    parser.add_argument("--hist", help="write a histogram CSV of the main column here")
    parser.add_argument("--bins", type=int, help="histogram bins (default 100)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


@contextlib.contextmanager
def open_output(path: Optional[str]):
    if not path:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def _summary_target(cfg: RunConfig) -> Optional[str]:
    if cfg.summary:
        return cfg.summary
    if cfg.output:
        return f"{cfg.output}.summary.json"
    return None


def side_frequencies(locations: Sequence[float], iv: Interval) -> Dict[str, float]:
    n = len(locations) or 1
    at_a = sum(1 for v in locations if v == iv.a)
    at_b = sum(1 for v in locations if v == iv.b)
    return {"a": at_a / n, "b": at_b / n, "interior": (len(locations) - at_a - at_b) / n}


def emit_samples(cfg: RunConfig, columns: Sequence[str], rows: Iterable[Dict[str, Any]],
                 stat_columns: Sequence[str], hist_column: str, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Stream rows in index order, then write the summary (and histogram if asked)."""
    started = time.perf_counter()
    collected: Dict[str, List[float]] = {c: [] for c in set(stat_columns) | {hist_column}}

    def tap(source):
        for row in source:
            for c in collected:
                collected[c].append(row[c])
            yield row

    with open_output(cfg.output) as out:
        if cfg.format == "csv":
            write_csv_rows(out, columns, tap(rows))
            body = None
        else:
            body = list(tap(rows))
        wall = time.perf_counter() - started
        extra = dict(extra or {})
        if "location" in collected:
            extra["exit_side_frequencies"] = side_frequencies(collected["location"], cfg.interval())
        summary = build_summary(cfg.subcommand, cfg.resolved(),
                                {c: collected[c] for c in stat_columns}, wall, extra)
        if body is not None:
            write_json({"summary": summary, "rows": body}, out)

    target = _summary_target(cfg)
    if cfg.format == "csv":
        if target:
            with open(target, "w", encoding="utf-8") as f:
                write_json(summary, f)
        else:
            write_json(summary, sys.stderr)
    elif target:
        with open(target, "w", encoding="utf-8") as f:
            write_json(summary, f)

    if cfg.hist:
        write_histogram(cfg.hist, collected[hist_column], cfg.bins)
    logger.info(f"{cfg.subcommand}: {len(collected[hist_column])} samples in {wall:.2f}s")
    return summary
