"""Grid-based monotone function algebra and 1D optimal transport.

Houses quantile curves, Frechet-Wasserstein means, warp maps, registration of
point patterns, the exact L2-Wasserstein distance between empirical measures,
and posterior summaries (pointwise means and credible bands).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bernstein import BernsteinMixture, bernstein_cdf

DEFAULT_GRID = 512
MONOTONE_TOL = 1e-12


class PatternError(ValueError):
    """Invalid point pattern input (empty where nonempty is required, etc.)."""


class ChainMismatchError(ValueError):
    """Posterior chains disagree in draw count."""


@dataclass(frozen=True)
class PointPattern:
    """A finite multiset of locations in [0,1], stored sorted."""

    points: np.ndarray

    def __post_init__(self):
        p = np.sort(np.asarray(self.points, dtype=float).ravel())
        if p.size and (p[0] < 0.0 or p[-1] > 1.0):
            raise PatternError("points outside [0,1]")
        object.__setattr__(self, "points", p)

    @property
    def count(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class MonotoneMap:
    """A nondecreasing function [0,1] -> [0,1] on an equispaced grid.

    Evaluation between knots is linear interpolation; the generalized inverse
    takes the left endpoint of flat segments (inf convention).
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1 or g.size < 2:
            raise ValueError("grid/values must be 1D arrays of equal length >= 2")
        if np.any(np.diff(v) < -MONOTONE_TOL):
            raise ValueError("values are not nondecreasing")
        v = np.maximum.accumulate(v)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values, grid_size: int | None = None) -> "MonotoneMap":
        v = np.asarray(values, dtype=float)
        g = np.linspace(0.0, 1.0, v.size if grid_size is None else grid_size + 1)
        return cls(grid=g, values=v)

    @classmethod
    def identity(cls, grid_size: int = DEFAULT_GRID) -> "MonotoneMap":
        g = np.linspace(0.0, 1.0, grid_size + 1)
        return cls(grid=g, values=g.copy())

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)

    def inverse_at(self, p):
        """Generalized inverse inf{t : self(t) >= p}, vectorized over p."""
        return generalized_inverse(self.grid, self.values, p)

    @property
    def grid_size(self) -> int:
        return self.grid.size - 1


def generalized_inverse(grid: np.ndarray, values: np.ndarray, p):
    """inf{t : v(t) >= p} for a piecewise-linear nondecreasing v on a grid."""
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    pp = np.atleast_1d(np.clip(p, values[0], values[-1]))
    idx = np.searchsorted(values, pp, side="left")
    out = np.empty_like(pp)
    at_start = idx == 0
    out[at_start] = grid[0]
    inner = ~at_start
    i = idx[inner]
    dv = values[i] - values[i - 1]
    # searchsorted(left) guarantees values[i-1] < p <= values[i], so dv > 0
    out[inner] = grid[i - 1] + (pp[inner] - values[i - 1]) / dv * (grid[i] - grid[i - 1])
    return float(out[0]) if scalar else out


def quantile_curve(cdf: MonotoneMap) -> MonotoneMap:
    """Generalized inverse of a CDF, sampled on the same grid of levels."""
    return MonotoneMap(grid=cdf.grid, values=cdf.inverse_at(cdf.grid))


def frechet_mean(cdfs: list[MonotoneMap]) -> MonotoneMap:
    """Invert, average the quantile curves pointwise, and invert back."""
    if not cdfs:
        raise ValueError("need at least one CDF")
    grid = cdfs[0].grid
    qbar = np.mean([c.inverse_at(grid) for c in cdfs], axis=0)
    vals = generalized_inverse(grid, qbar, grid)
    vals[0], vals[-1] = 0.0, 1.0
    return MonotoneMap(grid=grid, values=vals)


def warp_map(F_i: MonotoneMap, F: MonotoneMap) -> MonotoneMap:
    """Optimal transport map of F onto F_i: the composition F_i^{-1} o F."""
    vals = F_i.inverse_at(F.values)
    vals[0], vals[-1] = 0.0, 1.0
    return MonotoneMap(grid=F.grid, values=vals)


def register(observed: PointPattern, warp: MonotoneMap) -> PointPattern:
    """Pull observed points back through the warp: x -> T^{-1}(x)."""
    if observed.count == 0:
        return observed
    return PointPattern(points=warp.inverse_at(observed.points))


def wasserstein(a: PointPattern, b: PointPattern) -> float:
    """Exact L2-Wasserstein distance between normalized empirical measures."""
    if a.count == 0 or b.count == 0:
        raise PatternError("wasserstein requires nonempty patterns")
    xa, xb = a.points, b.points
    m, n = xa.size, xb.size
    if m == n:
        return float(np.sqrt(np.mean((xa - xb) ** 2)))
    # piecewise-constant quantiles merged over the union of jump levels
    levels = np.union1d(np.arange(1, m) / m, np.arange(1, n) / n)
    edges = np.concatenate(([0.0], levels, [1.0]))
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    qa = xa[np.minimum(np.ceil(mids * m).astype(int) - 1, m - 1)]
    qb = xb[np.minimum(np.ceil(mids * n).astype(int) - 1, n - 1)]
    return float(np.sqrt(np.sum(widths * (qa - qb) ** 2)))


@dataclass(frozen=True)
class CurveSummary:
    """Pointwise posterior mean with a symmetric quantile band."""

    mean: MonotoneMap
    lower: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True)
class RegistrationResult:
    frechet_mean: CurveSummary
    warps: list[CurveSummary]
    registered: list[PointPattern]
    registered_intervals: list[np.ndarray]  # per process: (m_i, 2) lo/hi
    band_level: float

    def to_dict(self) -> dict:
        def curve(c: CurveSummary) -> dict:
            return {
                "grid": c.mean.grid.tolist(),
                "mean": c.mean.values.tolist(),
                "lower": c.lower.tolist(),
                "upper": c.upper.tolist(),
            }
        return {
            "band_level": self.band_level,
            "frechet_mean": curve(self.frechet_mean),
            "warps": [curve(w) for w in self.warps],
            "registered": [
                {
                    "points": pat.points.tolist(),
                    "intervals": iv.tolist(),
                }
                for pat, iv in zip(self.registered, self.registered_intervals)
            ],
        }


def mixture_cdf_map(mix: BernsteinMixture, grid: np.ndarray) -> MonotoneMap:
    vals = bernstein_cdf(grid, mix)
    vals[0], vals[-1] = 0.0, 1.0
    return MonotoneMap(grid=grid, values=vals)


def warp_draws(chains: list[list[BernsteinMixture]], grid_size: int = DEFAULT_GRID):
    """Per-draw Frechet means and warps for n processes.

    chains[i] is the ordered draw list for process i; all must share length M.
    Returns (grid, F_draws [M, G+1], T_draws [n, M, G+1]).
    """
    n = len(chains)
    if n == 0:
        raise ChainMismatchError("no chains supplied")
    M = len(chains[0])
    if M == 0:
        raise ChainMismatchError("empty chain")
    if any(len(c) != M for c in chains):
        raise ChainMismatchError("chains have unequal draw counts")
    grid = np.linspace(0.0, 1.0, grid_size + 1)
    F_draws = np.empty((M, grid_size + 1))
    T_draws = np.empty((n, M, grid_size + 1))
    for j in range(M):
        cdfs = [mixture_cdf_map(chains[i][j], grid) for i in range(n)]
        F_j = frechet_mean(cdfs)
        F_draws[j] = F_j.values
        for i in range(n):
            T_draws[i, j] = warp_map(cdfs[i], F_j).values
    return grid, F_draws, T_draws


def _summarize(grid: np.ndarray, draws: np.ndarray, band_level: float) -> CurveSummary:
    lo_q = (1.0 - band_level) / 2.0
    mean = np.mean(draws, axis=0)
    lower = np.quantile(draws, lo_q, axis=0)
    upper = np.quantile(draws, 1.0 - lo_q, axis=0)
    return CurveSummary(
        mean=MonotoneMap(grid=grid, values=mean), lower=lower, upper=upper)


def posterior_summaries(chains: list[list[BernsteinMixture]],
                        observed: list[PointPattern],
                        grid_size: int = DEFAULT_GRID,
                        band_level: float = 0.95) -> RegistrationResult:
    """Posterior means and pointwise bands for the Frechet mean, warps, and
    registered points."""
    if not 0.0 < band_level < 1.0:
        raise ValueError("band_level must be in (0,1)")
    if len(chains) != len(observed):
        raise ChainMismatchError("chains and observed patterns differ in length")
    grid, F_draws, T_draws = warp_draws(chains, grid_size)
    n, M = T_draws.shape[0], T_draws.shape[1]
    lo_q = (1.0 - band_level) / 2.0

    f_summary = _summarize(grid, F_draws, band_level)
    warps = [_summarize(grid, T_draws[i], band_level) for i in range(n)]

    registered = []
    intervals = []
    for i in range(n):
        pts = observed[i].points
        if pts.size == 0:
            registered.append(observed[i])
            intervals.append(np.empty((0, 2)))
            continue
        reg = np.empty((M, pts.size))
        for j in range(M):
            reg[j] = generalized_inverse(grid, T_draws[i, j], pts)
        registered.append(PointPattern(points=np.mean(reg, axis=0)))
        iv = np.stack([np.quantile(reg, lo_q, axis=0),
                       np.quantile(reg, 1.0 - lo_q, axis=0)], axis=1)
        intervals.append(iv)
    return RegistrationResult(
        frechet_mean=f_summary, warps=warps, registered=registered,
        registered_intervals=intervals, band_level=band_level)


def curve_to_csv_rows(m: MonotoneMap) -> list[tuple[float, float]]:
    return list(zip(m.grid.tolist(), m.values.tolist()))
