"""Daily price ingest, simple returns, support estimation and resampling."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

# keeps x_min strictly above -1 after margin inflation
_MIN_RETURN_FLOOR = -1.0 + 1e-12


class DataError(ValueError):
    """Raised for malformed or out-of-contract market data."""


@dataclass(frozen=True)
class PriceSeries:
    dates: np.ndarray  # datetime64[D], strictly increasing
    prices: np.ndarray  # float64, strictly positive

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        prices = np.asarray(self.prices, dtype=np.float64)
        if dates.shape != prices.shape or dates.ndim != 1:
            raise DataError("dates and prices must be 1-D arrays of equal length")
        if len(prices) < 2:
            raise DataError(f"price series needs at least 2 rows, got {len(prices)}")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise DataError("prices must be finite and strictly positive")
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise DataError("dates must be strictly increasing")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSeries:
    returns: np.ndarray
    dates: np.ndarray | None = None  # date at the start of each period, optional

    def __post_init__(self):
        r = np.asarray(self.returns, dtype=np.float64)
        if r.ndim != 1:
            raise DataError("returns must be 1-D")
        if np.any(~np.isfinite(r)) or np.any(r <= -1.0):
            raise DataError("every return must be finite and > -1")
        object.__setattr__(self, "returns", r)

    def __len__(self) -> int:
        return len(self.returns)


@dataclass(frozen=True)
class SupportEstimate:
    x_min: float
    x_max: float
    margin: float = 0.0

    def __post_init__(self):
        if not (-1.0 < self.x_min < 0.0 < self.x_max):
            raise DataError(
                f"support must satisfy -1 < x_min < 0 < x_max, got [{self.x_min}, {self.x_max}]"
            )
        if self.margin < 0:
            raise DataError("margin must be nonnegative")

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all((x >= self.x_min - atol) & (x <= self.x_max + atol)))

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "margin": self.margin}


@dataclass(frozen=True)
class RatePath:
    rates: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=np.float64)
        if r.ndim != 1 or len(r) == 0:
            raise DataError("rate path must be a nonempty 1-D array")
        if np.any(~np.isfinite(r)) or np.any(r < 0):
            raise DataError("riskless rates must be finite and nonnegative")
        object.__setattr__(self, "rates", r)

    @classmethod
    def constant(cls, rate: float, n: int) -> "RatePath":
        return cls(np.full(n, float(rate)))

    def __len__(self) -> int:
        return len(self.rates)

    @property
    def max(self) -> float:
        return float(self.rates.max())

    @property
    def min(self) -> float:
        return float(self.rates.min())

    def check_against(self, support: SupportEstimate) -> None:
        """Raise unless every rate lies in ``[0, x_max)``."""
        if self.max >= support.x_max:
            raise DataError(
                f"riskless rate {self.max} must stay below x_max={support.x_max}"
            )


def load_prices(path, date_col: str = "Date", price_col: str = "Close") -> PriceSeries:
    """Read a header CSV of ISO dates and prices.

    Rows are numbered from 1 (first data row) in error messages. Rows are
    sorted by date; a repeated date is an error.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"price file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path} is empty")
        for col in (date_col, price_col):
            if col not in reader.fieldnames:
                raise DataError(f"{path}: missing column {col!r} (have {reader.fieldnames})")
        rows = []
        for i, rec in enumerate(reader, start=1):
            raw_date, raw_price = rec.get(date_col), rec.get(price_col)
            try:
                day = date.fromisoformat((raw_date or "").strip()[:10])
                price = float(raw_price)
            except (TypeError, ValueError):
                raise DataError(
                    f"unparsable row {i}: {raw_date!r}, {raw_price!r}"
                ) from None
            if not np.isfinite(price) or price <= 0:
                raise DataError(f"nonpositive price at row {i}")
            rows.append((day, price))

    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 rows, got {len(rows)}")
    rows.sort(key=lambda t: t[0])
    for (d0, _), (d1, _) in zip(rows, rows[1:]):
        if d0 == d1:
            raise DataError(f"duplicate date {d0.isoformat()}")
    return PriceSeries(
        np.array([d for d, _ in rows], dtype="datetime64[D]"),
        np.array([p for _, p in rows]),
    )


def compute_returns(p: PriceSeries) -> ReturnSeries:
    prices = p.prices
    if len(prices) < 2:
        raise DataError("series too short for returns")
    x = (prices[1:] - prices[:-1]) / prices[:-1]
    return ReturnSeries(x, p.dates[:-1])


def estimate_support(r: ReturnSeries | np.ndarray, margin: float = 0.0) -> SupportEstimate:
    """Inflate the sample min/max by ``1 + margin``."""
    x = r.returns if isinstance(r, ReturnSeries) else np.asarray(r, dtype=np.float64)
    if margin < 0:
        raise DataError("margin must be nonnegative")
    if x.size == 0 or x.min() >= 0 or x.max() <= 0:
        raise DataError(
            "returns need at least one negative and one positive value "
            "to define a support with x_min < 0 < x_max"
        )
    x_min = max((1.0 + margin) * float(x.min()), _MIN_RETURN_FLOOR)
    x_max = (1.0 + margin) * float(x.max())
    return SupportEstimate(x_min, x_max, margin)


def split(p: PriceSeries, boundary) -> tuple[PriceSeries, PriceSeries]:
    """In-sample / out-of-sample split sharing the boundary row.

    ``boundary`` need not be a trading day; the last date on or before it
    becomes the shared row.
    """
    b = np.datetime64(boundary, "D")
    if b < p.dates[0] or b > p.dates[-1]:
        raise DataError(
            f"split date {b} outside data range [{p.dates[0]}, {p.dates[-1]}]"
        )
    idx = int(np.searchsorted(p.dates, b, side="right")) - 1
    if idx < 1 or idx > len(p) - 2:
        raise DataError(f"split at {b} leaves a part with fewer than 2 rows")
    first = PriceSeries(p.dates[: idx + 1], p.prices[: idx + 1])
    second = PriceSeries(p.dates[idx:], p.prices[idx:])
    return first, second


def bootstrap_paths(
    r: ReturnSeries | np.ndarray, n_paths: int, horizon: int, seed: int
) -> np.ndarray:
    """i.i.d. resampling with replacement; one path per row."""
    x = r.returns if isinstance(r, ReturnSeries) else np.asarray(r, dtype=np.float64)
    if x.size == 0:
        raise DataError("cannot resample an empty return series")
    if n_paths < 1 or horizon < 1:
        raise DataError("n_paths and horizon must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(n_paths, horizon))
    return x[idx]


def write_returns_csv(path, r: ReturnSeries) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Date", "Return"])
        dates = r.dates if r.dates is not None else [""] * len(r)
        for d, x in zip(dates, r.returns):
            w.writerow([str(d), repr(float(x))])
