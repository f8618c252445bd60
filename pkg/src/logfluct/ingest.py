"""Daily quote files to normalized log-fluctuation series.

A quote file is delimiter-separated text with a header row, one date column
(ISO-8601) and one value column.  Rows whose value is not numeric (FRED
writes "." for holidays) are dropped, and returns are taken between
consecutive retained quotes.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import logging
import math
import os
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ._io import atomic_write_text

__all__ = [
    "IngestError",
    "QuoteParseError",
    "ColumnSpec",
    "QuoteSeries",
    "ReturnSeries",
    "parse_quotes",
    "serialize_quotes",
    "log_returns",
    "normalize",
    "returns_from_quotes",
    "fetch_remote",
    "cache_dir",
    "read_returns_csv",
    "write_returns_csv",
    "CACHE_ENV",
]

logger = logging.getLogger(__name__)

CACHE_ENV = "LOGFLUCT_CACHE_DIR"


class IngestError(ValueError):
    """Input cannot be turned into a usable series."""


class QuoteParseError(IngestError):
    """A row of a quote file is malformed."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class ColumnSpec:
    """Which columns hold the date and the quote.

    Columns may be given by header name or by zero-based position.
    """

    date: Union[str, int] = 0
    value: Union[str, int] = 1
    delimiter: str = ","


@dataclass(frozen=True)
class QuoteSeries:
    dates: np.ndarray  # datetime64[D], strictly increasing
    values: np.ndarray  # strictly positive, finite
    n_dropped: int = 0
    name: str = "value"

    def __len__(self):
        return len(self.values)

    def restrict(self, start=None, end=None) -> "QuoteSeries":
        """Keep observations with ``start <= date <= end`` (either bound optional)."""
        keep = np.ones(len(self), dtype=bool)
        if start is not None:
            keep &= self.dates >= np.datetime64(start, "D")
        if end is not None:
            keep &= self.dates <= np.datetime64(end, "D")
        return QuoteSeries(self.dates[keep], self.values[keep], self.n_dropped, self.name)


@dataclass(frozen=True)
class ReturnSeries:
    """Normalized log-fluctuations ``r_t = (r~_t - <r~>) / sigma``.

    ``dates[t]`` is the date of the later quote of each pair.
    """

    dates: np.ndarray
    values: np.ndarray
    raw_mean: float
    raw_std: float
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def raw(self) -> np.ndarray:
        """Undo the normalization, recovering the raw log-fluctuations."""
        return self.values * self.raw_std + self.raw_mean


def _resolve_column(header, col, what):
    if isinstance(col, int):
        if not 0 <= col < len(header):
            raise IngestError(f"{what} column index {col} out of range for header {header}")
        return col
    try:
        return header.index(col)
    except ValueError:
        raise IngestError(f"{what} column {col!r} not in header {header}") from None


def parse_quotes(raw: Union[bytes, str], spec: ColumnSpec = ColumnSpec()) -> QuoteSeries:
    """Parse a delimiter-separated quote file.

    Non-numeric values are dropped silently (missing-data markers), non-positive
    values are dropped with a warning, and malformed dates raise
    :class:`QuoteParseError` carrying the line number.  The number of dropped
    rows is reported in ``QuoteSeries.n_dropped``.
    """
    text = raw.decode("utf-8-sig") if isinstance(raw, (bytes, bytearray)) else raw
    reader = csv.reader(io.StringIO(text), delimiter=spec.delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestError("empty input: header row required") from None
    i_date = _resolve_column(header, spec.date, "date")
    i_val = _resolve_column(header, spec.value, "value")

    dates, values = [], []
    dropped = 0
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if max(i_date, i_val) >= len(row):
            raise QuoteParseError(lineno, f"expected at least {max(i_date, i_val) + 1} fields")
        try:
            day = dt.date.fromisoformat(row[i_date].strip())
        except ValueError:
            raise QuoteParseError(lineno, f"malformed date {row[i_date]!r}") from None
        try:
            value = float(row[i_val])
        except ValueError:
            dropped += 1
            continue
        if not math.isfinite(value):
            dropped += 1
            continue
        if value <= 0:
            logger.warning("line %d: non-positive quote %r dropped (log undefined)", lineno, value)
            dropped += 1
            continue
        if dates and day <= dates[-1]:
            raise QuoteParseError(lineno, f"date {day} not after previous {dates[-1]}")
        dates.append(day)
        values.append(value)

    if not values:
        raise IngestError("no valid quotes in input")
    name = header[i_val] or "value"
    return QuoteSeries(np.array(dates, dtype="datetime64[D]"), np.array(values), dropped, name)


def serialize_quotes(q: QuoteSeries, delimiter=",") -> str:
    """Inverse of :func:`parse_quotes`; floats use the shortest round-trip repr."""
    lines = [delimiter.join(["date", q.name])]
    lines += [f"{d}{delimiter}{v!r}" for d, v in zip(q.dates.astype(str), q.values.tolist())]
    return "\n".join(lines) + "\n"


def log_returns(q: QuoteSeries) -> np.ndarray:
    """Raw log-fluctuations ``ln Q_{t+1} - ln Q_t`` between retained quotes."""
    if len(q) < 2:
        raise IngestError(f"need at least 2 quotes for a return, got {len(q)}")
    return np.diff(np.log(q.values))


def normalize(raw, dates=None) -> ReturnSeries:
    """Center and scale to unit (population) standard deviation."""
    raw = np.asarray(raw, dtype=float)
    if raw.size < 2:
        raise IngestError("need at least 2 log-fluctuations to normalize")
    mean = float(raw.mean())
    std = float(raw.std())
    if not std > 0:
        raise IngestError("zero standard deviation: constant series cannot be normalized")
    values = (raw - mean) / std
    if dates is None:
        dates = np.arange(raw.size).astype("datetime64[D]")
    return ReturnSeries(np.asarray(dates, dtype="datetime64[D]"), values, mean, std)


def returns_from_quotes(q: QuoteSeries) -> ReturnSeries:
    r = normalize(log_returns(q), q.dates[1:])
    r.meta.update(name=q.name, n_quotes=len(q), n_dropped=q.n_dropped)
    return r


# --------------------------------------------------------------------------
# remote source with on-disk cache
# --------------------------------------------------------------------------


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "logfluct"


def _cache_path(url, directory):
    return Path(directory) / (hashlib.sha256(url.encode("utf-8")).hexdigest() + ".csv")


def fetch_remote(url: str, offline=False, directory: Optional[Path] = None, timeout=30.0) -> bytes:
    """Fetch ``url`` and cache the body; with ``offline=True`` read the cache only.

    A network failure falls back to the cache when one exists.
    """
    path = _cache_path(url, directory or cache_dir())
    if offline:
        if path.exists():
            return path.read_bytes()
        raise IngestError(f"offline mode and no cached copy of {url}")
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            body = resp.read()
    except urllib.error.HTTPError as exc:
        raise IngestError(f"HTTP {exc.code} fetching {url}") from exc
    except (urllib.error.URLError, OSError) as exc:
        if path.exists():
            logger.warning("fetch of %s failed (%s); using cached copy", url, exc)
            return path.read_bytes()
        raise IngestError(f"cannot fetch {url} and nothing cached: {exc}") from exc
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    tmp.write_bytes(body)
    os.replace(tmp, path)
    return body


# --------------------------------------------------------------------------
# return series files
# --------------------------------------------------------------------------


def write_returns_csv(r: ReturnSeries, path) -> None:
    """Write ``date,r`` rows with 12 significant digits."""
    lines = ["date,r"]
    lines += [f"{d},{v:.12g}" for d, v in zip(r.dates.astype(str), r.values.tolist())]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_returns_csv(path, raw_mean=0.0, raw_std=1.0) -> ReturnSeries:
    """Read a series written by :func:`write_returns_csv` (or any ``date,value`` file).

    Values are taken as already normalized.
    """
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise IngestError(f"{path}: empty file")
    dates, values = [], []
    for row in reader:
        if not row:
            continue
        try:
            dates.append(dt.date.fromisoformat(row[0].strip()))
            values.append(float(row[1]))
        except (ValueError, IndexError):
            raise QuoteParseError(reader.line_num, f"bad series row {row!r}") from None
    if len(values) < 2:
        raise IngestError(f"{path}: need at least 2 observations")
    return ReturnSeries(np.array(dates, dtype="datetime64[D]"), np.array(values), raw_mean, raw_std)
