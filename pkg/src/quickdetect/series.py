"""Price and return series: CSV ingestion, moment estimation, diagnostics.

The toolkit monitors first differences of a price (or level) series,
``d[i] = x[i+1] - x[i]``, not log-returns.  This module owns the plumbing
around those differences: loading and validating raw CSV data, building the
difference series, estimating Gaussian moments over index ranges, and the
exploratory summaries (autocorrelation, histogram, Q-Q points, lag scatter
pairs) used to judge whether an independent-Gaussian working model is
reasonable before any detector is run.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats


class CsvFormatError(ValueError):
    """Input CSV violates the expected schema (bad rows are named by number)."""


def _freeze(values) -> np.ndarray:
    out = np.array(values, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for :func:`load_csv`.

    ``date_format`` of ``None`` means ISO-8601 (``YYYY-MM-DD``); otherwise a
    single ``strptime`` pattern is accepted as the alternate format.
    """

    date_column: str = "Date"
    price_column: str = "Close"
    date_format: str | None = None

    def parse_date(self, text: str) -> dt.date:
        if self.date_format is None:
            return dt.date.fromisoformat(text.strip())
        return dt.datetime.strptime(text.strip(), self.date_format).date()


@dataclass(frozen=True)
class PriceSeries:
    """A dated level series with strictly increasing timestamps.

    Values must be finite and positive; at least two points are required so
    that a difference series exists.
    """

    timestamps: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.ndim != 1:
            raise ValueError("price values must be one-dimensional")
        if len(self.timestamps) != self.values.size:
            raise ValueError(
                f"{len(self.timestamps)} timestamps for {self.values.size} values"
            )
        if self.values.size < 2:
            raise ValueError("a price series needs at least two points")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("price values must be finite")
        if np.any(self.values <= 0.0):
            raise ValueError("price values must be positive")
        for prev, cur in zip(self.timestamps, self.timestamps[1:]):
            if cur <= prev:
                raise ValueError(f"timestamps not strictly increasing at {cur}")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ReturnSeries:
    """First differences of a :class:`PriceSeries`.

    ``values[j] = source.values[offset + j + 1] - source.values[offset + j]``.
    A detached series (``source is None``) is allowed for simulated data.
    """

    values: np.ndarray
    source: PriceSeries | None = None
    offset: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.ndim != 1:
            raise ValueError("return values must be one-dimensional")
        if self.values.size < 1:
            raise ValueError("a return series needs at least one value")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("return values must be finite")
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")
        if self.source is not None:
            if self.offset + self.values.size > len(self.source) - 1:
                raise ValueError("return series extends past its source")

    def __len__(self) -> int:
        return self.values.size

    @property
    def dates(self) -> tuple[dt.date, ...] | None:
        """Date on which each difference is realized (the later of its two days)."""
        if self.source is None:
            return None
        lo = self.offset + 1
        return self.source.timestamps[lo : lo + self.values.size]


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean/sd over a half-open index range of a return series."""

    mean: float
    sd: float
    count: int
    interval: tuple[int, int]
    ddof: int = 1

    def __post_init__(self) -> None:
        if self.count != self.interval[1] - self.interval[0]:
            raise ValueError("count must equal the interval width")
        if self.sd < 0.0:
            raise ValueError("sd cannot be negative")

    @property
    def is_degenerate(self) -> bool:
        """True when the range had zero variance (sd == 0)."""
        return self.sd == 0.0


@dataclass(frozen=True)
class AcfResult:
    """Sample autocorrelations at lags ``0..max_lag`` plus a white-noise band."""

    values: np.ndarray
    band: float

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.values.size)


@dataclass(frozen=True)
class Histogram:
    """Equal-width histogram with right-closed bins ``(e[j], e[j+1]]``.

    The leftmost bin additionally includes its left edge so the sample
    minimum is counted.
    """

    counts: np.ndarray
    edges: np.ndarray


@dataclass(frozen=True)
class QQPoints:
    """Sorted standardized sample vs. normal quantiles at positions (i-0.5)/n."""

    empirical: np.ndarray
    theoretical: np.ndarray


@dataclass(frozen=True)
class DiagnosticBundle:
    histogram: Histogram
    qq: QQPoints
    lag_pairs: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


def load_csv(path: str | Path, schema: CsvSchema | None = None) -> PriceSeries:
    """Load a dated price series from a CSV file.

    Rows are sorted by date after parsing.  Any row with an unparsable date,
    a non-numeric price, or a non-positive price is an error naming the row;
    so are duplicate dates and files with fewer than two valid rows.
    Identical input bytes always produce the identical series.
    """
    schema = schema or CsvSchema()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    rows: list[tuple[dt.date, float]] = []
    bad: list[str] = []
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for col in (schema.date_column, schema.price_column):
            if col not in header:
                raise CsvFormatError(f"missing column {col!r} in header {header}")
        for number, row in enumerate(reader, start=2):  # 1 is the header row
            raw_date = row.get(schema.date_column) or ""
            raw_price = row.get(schema.price_column) or ""
            try:
                date = schema.parse_date(raw_date)
            except (ValueError, TypeError):
                bad.append(f"row {number}: unparsable date {raw_date!r}")
                continue
            try:
                price = float(raw_price)
            except (ValueError, TypeError):
                bad.append(f"row {number}: non-numeric price {raw_price!r}")
                continue
            if not np.isfinite(price) or price <= 0.0:
                bad.append(f"row {number}: non-positive price {raw_price!r}")
                continue
            rows.append((date, price))
    if bad:
        raise CsvFormatError("; ".join(bad))
    rows.sort(key=lambda item: item[0])
    for (d0, _), (d1, _) in zip(rows, rows[1:]):
        if d0 == d1:
            raise CsvFormatError(f"duplicate date {d1.isoformat()}")
    if len(rows) < 2:
        raise CsvFormatError(f"need at least 2 valid rows, found {len(rows)}")
    return PriceSeries(
        timestamps=tuple(d for d, _ in rows),
        values=np.array([p for _, p in rows]),
    )


def to_returns(series: PriceSeries) -> ReturnSeries:
    """First differences ``x[i+1] - x[i]`` of the price series (length N-1)."""
    return ReturnSeries(values=np.diff(series.values), source=series, offset=0)


def _values_of(series) -> np.ndarray:
    return np.asarray(getattr(series, "values", series), dtype=float)


def estimate_moments(
    series: ReturnSeries, interval: tuple[int, int] | None = None, ddof: int = 1
) -> MomentEstimate:
    """Sample mean and sd over ``interval`` (half-open, default: everything).

    The sd uses divisor ``n - ddof`` and the divisor is recorded on the
    result.  A zero-variance range yields ``sd == 0`` and is flagged via
    :attr:`MomentEstimate.is_degenerate`, not rejected.
    """
    x = _values_of(series)
    if interval is None:
        interval = (0, x.size)
    start, stop = interval
    if not (0 <= start < stop <= x.size):
        raise ValueError(f"interval {interval} out of bounds for length {x.size}")
    window = x[start:stop]
    n = window.size
    if n <= ddof:
        raise ValueError(f"need more than {ddof} points in {interval} for sd")
    return MomentEstimate(
        mean=float(np.mean(window)),
        sd=float(np.std(window, ddof=ddof)),
        count=n,
        interval=(start, stop),
        ddof=ddof,
    )


def standardize(series: ReturnSeries, moments: MomentEstimate) -> ReturnSeries:
    """Center and scale by the supplied moment estimate.

    Standardizing by the series' own full-range moments gives sample mean 0
    and sample sd 1 (same divisor) up to rounding.
    """
    if moments.sd == 0.0:
        raise ValueError("cannot standardize by a zero sd")
    values = (_values_of(series) - moments.mean) / moments.sd
    return ReturnSeries(values=values, source=series.source, offset=series.offset)


def acf(series: ReturnSeries, max_lag: int) -> AcfResult:
    """Sample autocorrelation at lags ``0..max_lag``.

    Uses the standard biased estimator (fixed full-sample mean, denominator
    equal to the lag-0 sum of squares), so ``values[0] == 1``.  ``band`` is
    the approximate 95% white-noise threshold ``1.96/sqrt(n)``.
    """
    x = _values_of(series)
    n = x.size
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag {max_lag} must lie in [0, {n})")
    centered = x - x.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        raise ValueError("autocorrelation undefined for a constant series")
    values = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        values[k] = float(np.dot(centered[: n - k], centered[k:])) / denom
    return AcfResult(values=_freeze(values), band=1.96 / np.sqrt(n))


def _histogram(x: np.ndarray, bins: int) -> Histogram:
    lo, hi = float(np.min(x)), float(np.max(x))
    if lo == hi:  # degenerate range; widen as np.histogram does
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    # side="left" sends a value equal to an interior edge into the lower bin,
    # making every bin right-closed; the clip keeps the minimum in bin 0.
    idx = np.clip(np.searchsorted(edges, x, side="left") - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(counts=counts, edges=_freeze(edges))


def diagnostics(
    series: ReturnSeries, bins: int = 30, lags: tuple[int, ...] = (1, 2, 3)
) -> DiagnosticBundle:
    """Histogram, normal Q-Q points, and lag-k scatter pairs.

    Q-Q points standardize by the full-sample moments and use plotting
    positions ``(i - 0.5)/n``.  Each lag pair is ``(x[:-k], x[k:])``; a lag
    at or beyond the series length is an error.
    """
    x = _values_of(series)
    n = x.size
    if bins < 1:
        raise ValueError("bins must be positive")
    moments = estimate_moments(series)
    if moments.sd == 0.0:
        raise ValueError("diagnostics undefined for a constant series")
    standardized = np.sort((x - moments.mean) / moments.sd)
    positions = (np.arange(1, n + 1) - 0.5) / n
    qq = QQPoints(
        empirical=_freeze(standardized),
        theoretical=_freeze(stats.norm.ppf(positions)),
    )
    lag_pairs: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for k in lags:
        if not 1 <= k < n:
            raise ValueError(f"lag {k} must lie in [1, {n})")
        lag_pairs[int(k)] = (_freeze(x[:-k]), _freeze(x[k:]))
    return DiagnosticBundle(histogram=_histogram(x, bins), qq=qq, lag_pairs=lag_pairs)
