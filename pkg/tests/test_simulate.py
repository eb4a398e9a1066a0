import numpy as np
import pytest
from scipy import stats

from warpreg.simulate import (FitBudget, ScenarioDataset, gen_large_n,
                              gen_small_n, run_monte_carlo, scenario_cdf,
                              wdm, zeta)
from warpreg.transport import PointPattern

SMOKE_BUDGET = FitBudget(iterations=120, burn_in=40, thinning=4)


class TestSmallN:
    def test_three_processes_poisson_counts(self):
        ds = gen_small_n(0)
        assert len(ds.originals) == len(ds.warped) == len(ds.true_warps) == 3
        counts = [np.array([gen_small_n(s).originals[i].count
                            for s in range(40)]) for i in range(3)]
        mean_count = np.mean([c.mean() for c in counts])
        assert 130 < mean_count < 170  # Poisson(150)

    def test_warps_sum_to_identity(self):
        ds = gen_small_n(3)
        total = sum(w.values for w in ds.true_warps)
        np.testing.assert_allclose(total, 3.0 * ds.true_warps[0].grid,
                                   atol=1e-12)

    def test_seeded_determinism(self):
        d1, d2 = gen_small_n(7), gen_small_n(7)
        for a, b in zip(d1.originals + d1.warped, d2.originals + d2.warped):
            np.testing.assert_array_equal(a.points, b.points)

    def test_warped_is_pushforward_of_originals(self):
        ds = gen_small_n(5)
        for o, w, t in zip(ds.originals, ds.warped, ds.true_warps):
            assert o.count == w.count
            np.testing.assert_allclose(np.sort(t(o.points)), w.points,
                                       atol=1e-12)


class TestLargeN:
    def test_zeta_identity_at_zero(self):
        t = np.linspace(0, 1, 101)
        np.testing.assert_array_equal(zeta(t, 0), t)

    def test_zeta_pinned_endpoints(self):
        for k in (-5, -1, 1, 2, 7):
            assert zeta(0.0, k) == pytest.approx(0.0, abs=1e-15)
            assert zeta(1.0, k) == pytest.approx(1.0, abs=1e-12)

    def test_thirty_processes(self):
        ds = gen_large_n(1)
        assert len(ds.originals) == 30

    def test_warps_monotone_and_pinned(self):
        ds = gen_large_n(2)
        for w in ds.true_warps:
            assert np.all(np.diff(w.values) >= -1e-12)
            assert w.values[0] == pytest.approx(0.0, abs=1e-12)
            assert w.values[-1] == pytest.approx(1.0, abs=1e-12)

    def test_seeded_determinism(self):
        d1, d2 = gen_large_n(9), gen_large_n(9)
        for a, b in zip(d1.warped, d2.warped):
            np.testing.assert_array_equal(a.points, b.points)

    def test_mean_warp_approaches_identity(self):
        ds = gen_large_n(4, n=200)
        mean_warp = np.mean([w.values for w in ds.true_warps], axis=0)
        assert np.abs(mean_warp - ds.true_warps[0].grid).max() < 0.1


class TestScenarioDensities:
    @pytest.mark.parametrize("name", ["small_n", "large_n"])
    def test_sampler_matches_target_cdf(self, name):
        grid, cdf = scenario_cdf(name)
        rng = np.random.default_rng(0)
        x = np.sort(np.interp(rng.random(1_000_000), cdf, grid))
        emp = np.arange(1, x.size + 1) / x.size
        ks = np.abs(np.interp(x, grid, cdf) - emp).max()
        assert ks < 0.005

    def test_samples_in_unit_interval(self):
        ds = gen_small_n(11)
        for p in ds.originals + ds.warped:
            assert np.all((p.points >= 0) & (p.points <= 1))


class TestWdm:
    def test_zero_when_registered_equals_originals(self):
        pats = [[PointPattern(points=[0.1, 0.6]), PointPattern(points=[0.4])]]
        value, table = wdm(pats, pats)
        assert value == 0.0
        np.testing.assert_array_equal(table, 0.0)

    def test_single_atom_pair(self):
        value, _ = wdm([[PointPattern(points=[0.2])]],
                       [[PointPattern(points=[0.5])]])
        assert value == pytest.approx(0.3)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            wdm([[PointPattern(points=[0.2])]],
                [[PointPattern(points=[0.2]), PointPattern(points=[0.3])]])


class TestMonteCarlo:
    def test_single_run_report(self):
        report, timing = run_monte_carlo("small_n", 1, budget=SMOKE_BUDGET,
                                         seed=0)
        assert len(report["distances"]) == 1
        assert len(report["distances"][0]) == 3
        assert report["wdm"] == pytest.approx(sum(report["distances"][0]))
        assert timing["elapsed_seconds"] > 0

    def test_determinism(self):
        r1, _ = run_monte_carlo("small_n", 1, budget=SMOKE_BUDGET, seed=5)
        r2, _ = run_monte_carlo("small_n", 1, budget=SMOKE_BUDGET, seed=5)
        assert r1 == r2

    def test_bad_b(self):
        with pytest.raises(ValueError):
            run_monte_carlo("small_n", 0, budget=SMOKE_BUDGET)
