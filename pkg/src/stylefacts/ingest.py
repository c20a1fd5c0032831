"""Tick CSV ingestion, uniform-grid resampling, and period segmentation."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone

import numpy as np

__all__ = [
    "RawTick",
    "RawTickTable",
    "PriceSeries",
    "PeriodSpec",
    "parse_price_csv",
    "filter_jumps",
    "resample_to_grid",
    "split_periods",
]


@dataclass(frozen=True)
class RawTick:
    timestamp: datetime  # timezone-aware UTC
    price: float
    pair: str = ""


@dataclass
class RawTickTable:
    """Validated tick rows in input order; timestamps strictly increasing."""

    rows: list[RawTick] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def timestamps(self) -> list[datetime]:
        return [r.timestamp for r in self.rows]

    def prices(self) -> np.ndarray:
        return np.array([r.price for r in self.rows], dtype=float)


@dataclass
class PriceSeries:
    """Index values on a uniform time grid.

    ``gap_mask[i]`` is True where no fresh observation fell in the grid
    interval ending at sample i and the previous value was carried forward.
    """

    start: datetime
    dt_minutes: int
    values: np.ndarray
    gap_mask: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.gap_mask = np.asarray(self.gap_mask, dtype=bool)
        if self.values.size < 2:
            raise ValueError("PriceSeries needs at least 2 samples")
        if not np.all(self.values > 0):
            raise ValueError("PriceSeries values must be positive")
        if self.gap_mask.shape != self.values.shape:
            raise ValueError("gap_mask length must match values")
        if self.dt_minutes < 1:
            raise ValueError("dt_minutes must be a positive integer")
        if self.start.tzinfo is None:
            raise ValueError("PriceSeries start must be timezone-aware")

    def __len__(self) -> int:
        return self.values.size

    @property
    def step(self) -> timedelta:
        return timedelta(minutes=self.dt_minutes)

    @property
    def end(self) -> datetime:
        """Instant of the last sample."""
        return self.start + (len(self) - 1) * self.step

    def instant(self, i: int) -> datetime:
        return self.start + i * self.step

    def gap_fill_fraction(self) -> float:
        return float(self.gap_mask.mean())


@dataclass(frozen=True)
class PeriodSpec:
    """Named date range, inclusive on both ends."""

    name: str
    start_date: date
    end_date: date

    def __post_init__(self):
        if not self.start_date < self.end_date:
            raise ValueError(
                f"period {self.name!r}: start_date must precede end_date"
            )


def _parse_timestamp(text: str, line_num: int) -> datetime:
    raw = text.strip()
    iso = raw[:-1] + "+00:00" if raw.endswith(("Z", "z")) else raw
    try:
        ts = datetime.fromisoformat(iso)
    except ValueError:
        raise ValueError(f"line {line_num}: unparseable timestamp {raw!r}") from None
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _as_text(stream) -> str:
    if isinstance(stream, bytes):
        return stream.decode("utf-8")
    if isinstance(stream, str):
        return stream
    data = stream.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def parse_price_csv(stream, column_map: dict[str, str]) -> RawTickTable:
    """Parse a headered CSV of timestamped prices into a RawTickTable.

    ``column_map`` names the ``timestamp`` and ``price`` columns (an optional
    ``pair`` key selects a currency-pair tag column).  Timestamps are accepted
    in RFC 3339 or ``YYYY-MM-DD HH:MM:SS`` form; offsets are honored and
    converted to UTC, naive timestamps are taken as UTC.

    Raises ValueError naming the offending line for malformed rows,
    non-positive prices, unparseable or non-increasing timestamps.
    """
    for key in ("timestamp", "price"):
        if key not in column_map:
            raise ValueError(f"column_map is missing the {key!r} entry")
    ts_col = column_map["timestamp"]
    price_col = column_map["price"]
    pair_col = column_map.get("pair")

    reader = csv.DictReader(io.StringIO(_as_text(stream)))
    header = reader.fieldnames or []
    for col in filter(None, (ts_col, price_col, pair_col)):
        if col not in header:
            raise ValueError(f"column {col!r} not found in CSV header {header}")

    rows: list[RawTick] = []
    prev: datetime | None = None
    for record in reader:
        line = reader.line_num
        raw_ts = record.get(ts_col)
        raw_price = record.get(price_col)
        if raw_ts is None or raw_price is None:
            raise ValueError(f"line {line}: malformed row (missing fields)")
        ts = _parse_timestamp(raw_ts, line)
        try:
            price = float(raw_price)
        except ValueError:
            raise ValueError(
                f"line {line}: malformed price {raw_price!r}"
            ) from None
        if not np.isfinite(price) or price <= 0:
            raise ValueError(f"line {line}: price must be positive, got {raw_price}")
        if prev is not None:
            if ts == prev:
                raise ValueError(f"line {line}: duplicate timestamp {raw_ts.strip()!r}")
            if ts < prev:
                raise ValueError(
                    f"line {line}: timestamps not increasing at {raw_ts.strip()!r}"
                )
        prev = ts
        pair = (record.get(pair_col) or "").strip() if pair_col else ""
        rows.append(RawTick(ts, price, pair))

    if not rows:
        raise ValueError("no data rows")
    return RawTickTable(rows)


def filter_jumps(table: RawTickTable, threshold: float) -> tuple[RawTickTable, int]:
    """Drop ticks whose price jumps more than ``threshold`` from the last kept tick.

    Returns the filtered table and the number of dropped rows.
    """
    if threshold <= 0:
        raise ValueError("jump threshold must be positive")
    if not table.rows:
        return RawTickTable([]), 0
    kept = [table.rows[0]]
    dropped = 0
    for row in table.rows[1:]:
        if abs(row.price - kept[-1].price) > threshold:
            dropped += 1
        else:
            kept.append(row)
    return RawTickTable(kept), dropped


def resample_to_grid(
    table: RawTickTable, dt_minutes: int = 10, max_gap: int = 6
) -> PriceSeries:
    """Resample ticks onto a uniform grid anchored at the first tick.

    Each grid point takes the last observation at or before it.  Grid
    intervals with no fresh tick are filled by carrying the previous value
    forward and flagged in ``gap_mask``; any run of more than ``max_gap``
    consecutive filled points aborts with the gap's time range.
    """
    if not table.rows:
        raise ValueError("empty tick table")
    if dt_minutes < 1:
        raise ValueError("dt_minutes must be a positive integer")
    if max_gap < 0:
        raise ValueError("max_gap must be non-negative")

    times = np.array([r.timestamp.timestamp() for r in table.rows])
    if np.any(np.diff(times) <= 0):
        raise ValueError("tick table timestamps must be strictly increasing")
    prices = table.prices()

    step = dt_minutes * 60.0
    n = int((times[-1] - times[0]) // step) + 1
    if n < 2:
        raise ValueError("tick table spans less than two grid steps")
    grid = times[0] + step * np.arange(n)

    idx = np.searchsorted(times, grid, side="right") - 1
    values = prices[idx]
    gap_mask = np.zeros(n, dtype=bool)
    gap_mask[1:] = idx[1:] == idx[:-1]

    run = 0
    start_ts = table.rows[0].timestamp
    for i, gap in enumerate(gap_mask):
        if gap:
            run += 1
            if run > max_gap:
                # extend to the full run for the error message
                j = i
                while j + 1 < n and gap_mask[j + 1]:
                    j += 1
                lo = start_ts + timedelta(minutes=dt_minutes * (i - run + 1))
                hi = start_ts + timedelta(minutes=dt_minutes * j)
                raise ValueError(
                    f"gap of {j - (i - run)} grid steps exceeds max_gap={max_gap} "
                    f"between {lo.isoformat()} and {hi.isoformat()}"
                )
        else:
            run = 0

    return PriceSeries(start=start_ts, dt_minutes=dt_minutes, values=values, gap_mask=gap_mask)


def split_periods(
    series: PriceSeries, specs: list[PeriodSpec]
) -> dict[str, PriceSeries]:
    """Slice a series into named periods covering [start 00:00, end 24:00) UTC.

    Specs must not overlap and must lie inside the series span.
    """
    ordered = sorted(specs, key=lambda s: s.start_date)
    for a, b in zip(ordered, ordered[1:]):
        if b.start_date <= a.end_date:
            raise ValueError(f"periods {a.name!r} and {b.name!r} overlap")

    step = series.step
    out: dict[str, PriceSeries] = {}
    for spec in specs:
        p_start = datetime.combine(spec.start_date, time(0, 0), tzinfo=timezone.utc)
        p_end = datetime.combine(
            spec.end_date + timedelta(days=1), time(0, 0), tzinfo=timezone.utc
        )
        if p_start < series.start or p_end > series.end + step:
            raise ValueError(
                f"period {spec.name!r} ({spec.start_date}..{spec.end_date}) "
                f"is outside the data span {series.start.isoformat()}"
                f"..{series.end.isoformat()}"
            )
        step_s = step.total_seconds()
        # first grid index at/after p_start, first index at/after p_end
        i_lo = math.ceil((p_start - series.start).total_seconds() / step_s)
        i_hi = math.ceil((p_end - series.start).total_seconds() / step_s)
        i_lo = max(i_lo, 0)
        i_hi = min(i_hi, len(series))
        if i_hi - i_lo < 2:
            raise ValueError(f"period {spec.name!r} selects fewer than 2 samples")
        out[spec.name] = PriceSeries(
            start=series.instant(i_lo),
            dt_minutes=series.dt_minutes,
            values=series.values[i_lo:i_hi].copy(),
            gap_mask=series.gap_mask[i_lo:i_hi].copy(),
        )
    return out
