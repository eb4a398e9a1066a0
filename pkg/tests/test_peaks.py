import datetime as dt

import numpy as np
import pytest

from warpreg.peaks import (DailySeries, PeakSet, SeriesError, climate_year,
                           extract_peaks, fit_peakset, rescale_support, spi,
                           spi_global, spi_posterior, synthetic_daily_series)
from warpreg.simulate import zeta
from warpreg.transport import MonotoneMap, PointPattern

G = 512


def grid_warp(fn):
    t = np.linspace(0, 1, G + 1)
    return MonotoneMap(grid=t, values=fn(t))


def one_year_series(values, year=2000):
    start = dt.date(year, 4, 1)
    dates = [start + dt.timedelta(days=i) for i in range(len(values))]
    return DailySeries(dates=dates, values=np.asarray(values, dtype=float))


class TestClimateYear:
    def test_april_to_march_bucketing(self):
        assert climate_year(dt.date(1990, 4, 1)) == 1990
        assert climate_year(dt.date(1991, 3, 31)) == 1990
        assert climate_year(dt.date(1991, 4, 1)) == 1991

    def test_configurable_start(self):
        assert climate_year(dt.date(1990, 2, 1), start_month=1) == 1990


class TestExtractPeaks:
    def test_counting_rule_above(self):
        series = one_year_series(np.arange(1, 366))
        ps = extract_peaks(series, 0.95, "above")
        # type-7 quantile of 1..365 at 0.95 is 346.8; the top 19 days qualify
        assert ps.patterns[0].count == 19
        top = np.sort(ps.patterns[0].points)
        np.testing.assert_allclose(top, np.arange(346, 365) / 364)

    def test_constant_series_degenerate_warning(self):
        series = one_year_series(np.full(365, 70.0))
        with pytest.warns(UserWarning, match="degenerate"):
            ps = extract_peaks(series, 0.95, "above")
        assert ps.patterns[0].count == 365

    def test_insufficient_year_rejected(self):
        series = one_year_series(np.arange(10))
        with pytest.raises(SeriesError, match="below the floor"):
            extract_peaks(series, 0.95, "above")

    def test_duality_above_below(self):
        rng = np.random.default_rng(0)
        vals = rng.normal(60, 10, 365)
        above = extract_peaks(one_year_series(vals), 0.95, "above")
        below = extract_peaks(one_year_series(-vals), 0.05, "below")
        np.testing.assert_allclose(above.patterns[0].points,
                                   below.patterns[0].points)

    def test_bad_inputs(self):
        series = one_year_series(np.arange(365))
        with pytest.raises(SeriesError):
            extract_peaks(series, 1.5, "above")
        with pytest.raises(SeriesError):
            extract_peaks(series, 0.95, "sideways")


class TestRescaleSupport:
    def make(self, points_by_year):
        return PeakSet(years=list(range(len(points_by_year))),
                       patterns=[PointPattern(points=p)
                                 for p in points_by_year],
                       direction="above",
                       thresholds=[0.0] * len(points_by_year), level=0.95)

    def test_pooled_extremes_map_to_unit(self):
        out = rescale_support(self.make([[0.1, 0.9]]))
        np.testing.assert_allclose(out.patterns[0].points, [0.0, 1.0])
        assert out.support_window == (0.1, 0.9)

    def test_spanning_input_unchanged(self):
        out = rescale_support(self.make([[0.0, 0.3], [0.8, 1.0]]))
        np.testing.assert_allclose(
            np.concatenate([p.points for p in out.patterns]),
            [0.0, 0.3, 0.8, 1.0])

    def test_round_trip_through_window(self):
        raw = [[0.2, 0.35], [0.3, 0.61]]
        out = rescale_support(self.make(raw))
        lo, hi = out.support_window
        back = [p.points * (hi - lo) + lo for p in out.patterns]
        np.testing.assert_allclose(np.concatenate(back),
                                   np.concatenate(raw), atol=1e-12)

    def test_degenerate_window(self):
        with pytest.raises(SeriesError, match="degenerate"):
            rescale_support(self.make([[0.5, 0.5]]))


class TestSpi:
    def test_identity_zero(self):
        assert spi(MonotoneMap.identity(G)) == 0.0

    def test_square_warp(self):
        assert spi(grid_warp(lambda t: t ** 2)) == pytest.approx(
            1 / 6, abs=1.0 / G ** 2)

    def test_mirror_warp(self):
        assert spi(grid_warp(lambda t: 1 - (1 - t) ** 2)) == pytest.approx(
            1 / 6, abs=1.0 / G ** 2)

    def test_mirror_symmetry_invariance(self):
        w = grid_warp(lambda t: t ** 3)
        # relabel t -> 1-t jointly in domain and codomain
        mirrored = MonotoneMap(grid=w.grid, values=1.0 - w.values[::-1])
        assert spi(mirrored) == pytest.approx(spi(w), abs=1e-12)

    def test_zero_iff_identity(self):
        w = grid_warp(lambda t: np.clip(t + 0.02 * np.sin(np.pi * t), 0, 1))
        assert spi(w) > 1.0 / G

    def test_global_mean(self):
        assert spi_global(0.0, 0.0) == 0.0
        assert spi_global(1 / 6, 1 / 6) == pytest.approx(1 / 6)
        assert spi_global(0.1, 0.3) == pytest.approx(0.2)
        with pytest.raises(ValueError):
            spi_global(-0.1, 0.2)


class TestSyntheticSeries:
    def test_years_and_span(self):
        s = synthetic_daily_series(n_years=3, seed=0)
        years = {climate_year(d) for d in s.dates}
        assert years == {1990, 1991, 1992}

    def test_csv_round_trip(self, tmp_path):
        s = synthetic_daily_series(n_years=2, seed=1)
        path = tmp_path / "series.csv"
        with open(path, "w") as fh:
            fh.write("date,value\n")
            for d, v in zip(s.dates, s.values):
                fh.write(f"{d.isoformat()},{v}\n")
        back = DailySeries.from_csv(path)
        assert back.dates == s.dates
        np.testing.assert_array_equal(back.values, s.values)


def test_pipeline_recovers_known_warp_spi():
    """Warp synthetic clustered patterns with known maps, fit, and compare
    recovered per-process irregularity scores to the truth."""
    grid = np.linspace(0, 1, G + 1)
    k_true = [0, 2, -2, 1]
    true_spi = [spi(MonotoneMap(grid=grid, values=zeta(grid, k))) for k in k_true]
    errors = []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        warped = []
        for k in k_true:
            base = np.concatenate([
                np.clip(rng.normal(0.3, 0.04, 15), 0, 1),
                np.clip(rng.normal(0.7, 0.04, 15), 0, 1)])
            warped.append(PointPattern(points=np.clip(zeta(base, k), 0, 1)))
        ps = PeakSet(years=list(range(4)), patterns=warped, direction="above",
                     thresholds=[0.0] * 4, level=0.95)
        chains = fit_peakset(ps, iterations=1200, burn_in=600, thinning=3,
                             seed=seed)
        est = spi_posterior(chains, grid_size=G)
        errors.append(np.median([abs(e["mean"] - t)
                                 for e, t in zip(est, true_spi)]))
    # per-draw integration of |T - t| is upward-biased under posterior noise,
    # leaving a stable ~0.03 offset at this sample size; pilots over these
    # seeds gave median errors of 0.029-0.035
    assert np.median(errors) < 0.05
