"""Annual temperature-peak extraction and scores of peak irregularity.

Daily series are bucketed into climate years (April to March by default).
Per year, the days whose value exceeds (or falls below) that year's empirical
quantile form a point pattern of day-of-year fractions; pooled patterns are
affinely rescaled so the warp functions are supported on all of [0,1].  The
irregularity score of a warp is its L1 deviation from the identity.
"""

from __future__ import annotations

import csv
import datetime as dt
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .gibbs import Hyperparameters, MCMCConfig, fit_posterior
from .transport import MonotoneMap, PointPattern, warp_draws

MIN_RECORDS_PER_YEAR = 30


class SeriesError(ValueError):
    """Malformed or insufficient daily series input."""


@dataclass(frozen=True)
class DailySeries:
    dates: list[dt.date]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if len(self.dates) != v.size:
            raise SeriesError("dates and values differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise SeriesError(f"dates not strictly increasing at {b}")

    @classmethod
    def from_csv(cls, path) -> "DailySeries":
        dates, values = [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "date" not in reader.fieldnames \
                    or "value" not in reader.fieldnames:
                raise SeriesError("CSV must have 'date' and 'value' columns")
            for row in reader:
                dates.append(dt.date.fromisoformat(row["date"]))
                values.append(float(row["value"]))
        return cls(dates=dates, values=np.asarray(values))


@dataclass(frozen=True)
class PeakSet:
    years: list[int]
    patterns: list[PointPattern]
    direction: str  # "above" or "below"
    thresholds: list[float]
    level: float
    support_window: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "level": self.level,
            "support_window": list(self.support_window)
            if self.support_window else None,
            "years": [
                {"year": int(y), "threshold": float(u),
                 "points": p.points.tolist()}
                for y, u, p in zip(self.years, self.thresholds, self.patterns)
            ],
        }


def climate_year(date: dt.date, start_month: int = 4) -> int:
    """Label a date with the calendar year in which its climate year starts."""
    return date.year if date.month >= start_month else date.year - 1


def extract_peaks(series: DailySeries, level: float, direction: str,
                  start_month: int = 4,
                  min_records: int = MIN_RECORDS_PER_YEAR,
                  quantile_method: str = "linear") -> PeakSet:
    """Per-year quantile thresholding; positions are day fractions of the
    year's record span."""
    if not 0.0 < level < 1.0:
        raise SeriesError("level must be in (0,1)")
    if direction not in ("above", "below"):
        raise SeriesError("direction must be 'above' or 'below'")
    groups: dict[int, list[int]] = {}
    for idx, d in enumerate(series.dates):
        groups.setdefault(climate_year(d, start_month), []).append(idx)
    years, patterns, thresholds = [], [], []
    for year in sorted(groups):
        idxs = groups[year]
        if len(idxs) < min_records:
            raise SeriesError(
                f"year {year} has {len(idxs)} records, below the floor of "
                f"{min_records}")
        vals = series.values[idxs]
        u = float(np.quantile(vals, level, method=quantile_method))
        if direction == "above":
            hit = vals >= u
        else:
            hit = vals <= u
        if hit.all():
            warnings.warn(f"year {year}: every record meets the threshold "
                          "(degenerate, e.g. constant series)")
        first, last = series.dates[idxs[0]], series.dates[idxs[-1]]
        span = (last - first).days
        if span == 0:
            raise SeriesError(f"year {year} spans a single day")
        pos = np.array([(series.dates[idxs[i]] - first).days / span
                        for i in np.nonzero(hit)[0]])
        years.append(year)
        patterns.append(PointPattern(points=pos))
        thresholds.append(u)
    return PeakSet(years=years, patterns=patterns, direction=direction,
                   thresholds=thresholds, level=level)


def rescale_support(peaks: PeakSet) -> PeakSet:
    """Affine map sending the pooled minimum to 0 and pooled maximum to 1."""
    pooled = np.concatenate([p.points for p in peaks.patterns])
    if pooled.size == 0:
        raise SeriesError("no peaks to rescale")
    lo, hi = float(pooled.min()), float(pooled.max())
    if hi <= lo:
        raise SeriesError("degenerate support window: pooled min equals max")
    patterns = [PointPattern(points=(p.points - lo) / (hi - lo))
                for p in peaks.patterns]
    return replace(peaks, patterns=patterns, support_window=(lo, hi))


def spi(warp: MonotoneMap) -> float:
    """L1 deviation of a warp from the identity, by the trapezoid rule."""
    return float(np.trapezoid(np.abs(warp.values - warp.grid), warp.grid))


def spi_global(spi_above: float, spi_below: float) -> float:
    if spi_above < 0 or spi_below < 0:
        raise ValueError("scores must be nonnegative")
    return 0.5 * (spi_above + spi_below)


def spi_posterior(chains, grid_size: int = 512,
                  band_level: float = 0.95) -> list[dict]:
    """Per-process posterior mean and quantile interval of the irregularity
    score, integrating per draw."""
    grid, _, T_draws = warp_draws(chains, grid_size)
    lo_q = (1.0 - band_level) / 2.0
    out = []
    for i in range(T_draws.shape[0]):
        scores = np.trapezoid(np.abs(T_draws[i] - grid[None, :]), grid, axis=1)
        out.append({
            "mean": float(scores.mean()),
            "lower": float(np.quantile(scores, lo_q)),
            "upper": float(np.quantile(scores, 1.0 - lo_q)),
        })
    return out


def fit_peakset(peaks: PeakSet, hyper: Hyperparameters = Hyperparameters(),
                iterations: int = 2000, burn_in: int = 1000, thinning: int = 2,
                seed: int = 0) -> list:
    """One posterior chain per year, with seeds derived from (seed, year index)."""
    chains = []
    for i, pattern in enumerate(peaks.patterns):
        cfg = MCMCConfig(
            iterations=iterations, burn_in=burn_in, thinning=thinning,
            seed=int(np.random.SeedSequence([seed, i]).generate_state(1)[0]))
        chains.append(fit_posterior(pattern, hyper, cfg).draws)
    return chains


def synthetic_daily_series(n_years: int = 8, seed: int = 0,
                           shifts_days=None, start_year: int = 1990,
                           noise_sd: float = 1.5) -> DailySeries:
    """Sinusoidal daily temperatures with per-year phase shifts, April-to-March.

    shifts_days[j] delays year j's seasonal cycle; defaults to small shifts
    with one strongly shifted year.
    """
    rng = np.random.default_rng(seed)
    if shifts_days is None:
        shifts_days = [0.0, 2.0, -3.0, 1.0, 25.0, -2.0, 3.0, 0.0][:n_years]
        while len(shifts_days) < n_years:
            shifts_days.append(0.0)
    dates, values = [], []
    for j in range(n_years):
        start = dt.date(start_year + j, 4, 1)
        end = dt.date(start_year + j + 1, 3, 31)
        n_days = (end - start).days + 1
        day = np.arange(n_days)
        # southern-hemisphere cycle: hottest around mid climate year
        phase = 2.0 * np.pi * (day - shifts_days[j] - n_days / 2.0) / 365.25
        temp = 60.0 + 18.0 * np.cos(phase) + rng.normal(0.0, noise_sd, n_days)
        dates.extend(start + dt.timedelta(days=int(d)) for d in day)
        values.extend(np.round(temp))
    return DailySeries(dates=dates, values=np.asarray(values))
