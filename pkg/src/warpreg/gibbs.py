"""Posterior sampling for the Bernstein-Dirichlet hierarchy.

Each observed point pattern gets its own chain over (latent locations, degree
k, DP precision alpha).  The Dirichlet process is handled marginally through a
Polya-urn step with cluster bookkeeping; the degree is drawn exactly from its
discrete conditional; alpha uses the standard auxiliary-variable update.  A
saved draw converts the latent state to a simplex weight vector through the
conditional mixing CDF (base measure plus cluster atoms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from .bernstein import BernsteinMixture
from .transport import PointPattern

BOUNDARY_CLAMP = 1e-9
REMIX_GRID = 50


class ConfigError(ValueError):
    """Invalid run configuration."""


class EmptyDataError(ValueError):
    """A chain needs at least one observed point."""


@dataclass(frozen=True)
class Hyperparameters:
    k_max: int = 100
    a0: float = 1.0
    b0: float = 1.0
    gamma_shape: float = 1.0
    gamma_rate: float = 1.0

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        for name in ("a0", "b0", "gamma_shape", "gamma_rate"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class MCMCConfig:
    iterations: int = 10000
    burn_in: int = 5000
    thinning: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (self.iterations > self.burn_in >= 0):
            raise ConfigError("need iterations > burn_in >= 0")
        if self.thinning < 1:
            raise ConfigError("thinning must be >= 1")

    @property
    def n_draws(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thinning))


@dataclass
class GibbsState:
    """Latent augmentation: one y_j per data point, shared within clusters."""

    latent_locations: np.ndarray
    k: int
    alpha: float
    cluster_labels: np.ndarray


@dataclass(frozen=True)
class PosteriorChain:
    draws: list[BernsteinMixture]
    alphas: np.ndarray
    seed: int
    burn_in: int
    thinning: int
    total_iterations: int
    max_weight_correction: float = 0.0

    def to_dict(self) -> dict:
        return {
            "metadata": {
                "seed": int(self.seed),
                "iterations": int(self.total_iterations),
                "burn_in": int(self.burn_in),
                "thinning": int(self.thinning),
            },
            "draws": [
                {"k": d.k, "weights": [float(w) for w in d.weights],
                 "alpha": float(a)}
                for d, a in zip(self.draws, self.alphas)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PosteriorChain":
        meta = d["metadata"]
        draws = [BernsteinMixture(k=int(e["k"]),
                                  weights=np.asarray(e["weights"], dtype=float))
                 for e in d["draws"]]
        alphas = np.array([e["alpha"] for e in d["draws"]], dtype=float)
        return cls(draws=draws, alphas=alphas, seed=meta["seed"],
                   burn_in=meta["burn_in"], thinning=meta["thinning"],
                   total_iterations=meta["iterations"])


def _clamp(x: np.ndarray) -> np.ndarray:
    return np.clip(x, BOUNDARY_CLAMP, 1.0 - BOUNDARY_CLAMP)


def _bins(k: int, y: np.ndarray) -> np.ndarray:
    """Bin index z = ceil(k*y) in {1..k}."""
    return np.clip(np.ceil(k * np.asarray(y)).astype(np.int64), 1, k)


def _base_bin_masses(hyper: Hyperparameters, k: int) -> np.ndarray:
    edges = stats.beta.cdf(np.linspace(0.0, 1.0, k + 1), hyper.a0, hyper.b0)
    w = np.diff(edges)
    return w / w.sum()


def _log_beta_kernels(x: np.ndarray, k: int) -> np.ndarray:
    """Matrix of log beta(x_j | i, k-i+1) for i = 1..k; shape (m, k)."""
    i = np.arange(1, k + 1)
    lc = gammaln(k + 1) - gammaln(i) - gammaln(k - i + 1)
    return lc + np.outer(np.log(x), i - 1) + np.outer(np.log1p(-x), k - i)


class _Sampler:
    """Mutable chain engine for one point pattern."""

    def __init__(self, data: PointPattern, hyper: Hyperparameters,
                 rng: np.random.Generator, state: GibbsState | None = None):
        if data.count == 0:
            raise EmptyDataError("cannot fit an empty point pattern")
        self.hyper = hyper
        self.rng = rng
        self.x = _clamp(data.points)
        self.lnx = np.log(self.x)
        self.ln1mx = np.log1p(-self.x)
        m = self.x.size
        self.m = m
        self.base_uniform = (hyper.a0 == 1.0 and hyper.b0 == 1.0)
        self._remix_grid = (np.arange(REMIX_GRID) + 0.5) / REMIX_GRID
        self._remix_logbase = stats.beta.logpdf(
            self._remix_grid, hyper.a0, hyper.b0)
        kmax = hyper.k_max
        self._kvec = np.arange(1, kmax + 1)
        self._lgk1 = gammaln(self._kvec + 1.0)

        if state is None:
            self.k = min(kmax, max(1, int(round(math.sqrt(m)))))
            self.alpha = 1.0
            self.y = self.x.copy()
            self.labels = np.arange(m, dtype=np.int64)
            self.cl_y = self.x.copy()
            self.cl_n = np.ones(m, dtype=np.int64)
            self.C = m
        else:
            self._load_state(state)

        # per-sweep caches
        self.logB = None
        self.cl_z = None
        self.wstar = None

    def _load_state(self, state: GibbsState) -> None:
        y = np.asarray(state.latent_locations, dtype=float)
        labels = np.asarray(state.cluster_labels, dtype=np.int64)
        if y.size != self.m or labels.size != self.m:
            raise ConfigError("state size does not match data size")
        self.k = int(state.k)
        self.alpha = float(state.alpha)
        uniq, inv = np.unique(labels, return_inverse=True)
        self.labels = inv.astype(np.int64)
        self.C = uniq.size
        cap = max(self.m, self.C)
        self.cl_y = np.zeros(cap)
        self.cl_n = np.zeros(cap, dtype=np.int64)
        self.y = _clamp(y)
        for c in range(self.C):
            members = np.nonzero(self.labels == c)[0]
            self.cl_y[c] = self.y[members[0]]
            self.cl_n[c] = members.size
        self.y = self.cl_y[self.labels].copy()

    def snapshot(self) -> GibbsState:
        return GibbsState(latent_locations=self.y.copy(), k=self.k,
                          alpha=self.alpha, cluster_labels=self.labels.copy())

    # -- sweep components -------------------------------------------------

    def refresh_kernel_cache(self) -> None:
        self.logB = _log_beta_kernels(self.x, self.k)
        self.wstar = _base_bin_masses(self.hyper, self.k)
        self.cl_z = None  # recomputed lazily

    def _cluster_bins(self) -> np.ndarray:
        if self.cl_z is None or self.cl_z.size < self.C:
            self.cl_z = _bins(self.k, self.cl_y[:self.C])
        return self.cl_z[:self.C]

    def _fresh_location(self, row: np.ndarray) -> float:
        """Draw y from the base-measure conditional given one observation."""
        lw = np.log(self.wstar) + row
        lw -= lw.max()
        w = np.exp(lw)
        cs = np.cumsum(w)
        i = int(np.searchsorted(cs, self.rng.random() * cs[-1])) + 1
        i = min(i, self.k)
        u = self.rng.random()
        if self.base_uniform:
            return (i - 1 + u) / self.k
        lo = stats.beta.cdf((i - 1) / self.k, self.hyper.a0, self.hyper.b0)
        hi = stats.beta.cdf(i / self.k, self.hyper.a0, self.hyper.b0)
        return float(stats.beta.ppf(lo + u * (hi - lo),
                                    self.hyper.a0, self.hyper.b0))

    def update_locations(self) -> None:
        """Polya-urn resampling of each latent location."""
        if self.logB is None:
            self.refresh_kernel_cache()
        logq0 = logsumexp(np.log(self.wstar)[None, :] + self.logB, axis=1)
        logalpha = math.log(self.alpha)
        rng = self.rng
        for j in range(self.m):
            c = self.labels[j]
            self.cl_n[c] -= 1
            if self.cl_n[c] == 0:
                last = self.C - 1
                if c != last:
                    self.cl_y[c] = self.cl_y[last]
                    self.cl_n[c] = self.cl_n[last]
                    self.labels[self.labels == last] = c
                self.C = last
                self.cl_z = None
            row = self.logB[j]
            C = self.C
            if C:
                z = self._cluster_bins()
                lw = np.log(self.cl_n[:C]) + row[z - 1]
                lw_new = logalpha + logq0[j]
                mx = max(lw.max(), lw_new)
                w = np.exp(lw - mx)
                cs = np.cumsum(w)
                tot = cs[-1] + math.exp(lw_new - mx)
                u = rng.random() * tot
                if u < cs[-1]:
                    idx = int(np.searchsorted(cs, u))
                    self.labels[j] = idx
                    self.cl_n[idx] += 1
                    self.y[j] = self.cl_y[idx]
                    continue
            # open a fresh cluster
            ynew = self._fresh_location(row)
            self.cl_y[self.C] = ynew
            self.cl_n[self.C] = 1
            self.labels[j] = self.C
            self.y[j] = ynew
            self.C += 1
            self.cl_z = None

    def remix_cluster_locations(self) -> None:
        """Redraw each cluster's shared location from its grid conditional."""
        if self.logB is None:
            self.refresh_kernel_cache()
        S = np.zeros((self.C, self.k))
        np.add.at(S, self.labels, self.logB)
        zg = _bins(self.k, self._remix_grid) - 1
        rng = self.rng
        for c in range(self.C):
            lw = self._remix_logbase + S[c, zg]
            lw -= lw.max()
            w = np.exp(lw)
            cs = np.cumsum(w)
            r = int(np.searchsorted(cs, rng.random() * cs[-1]))
            self.cl_y[c] = self._remix_grid[min(r, REMIX_GRID - 1)]
        self.cl_z = None
        self.y = self.cl_y[self.labels].copy()

    def update_degree(self) -> None:
        """Exact draw of k from its discrete conditional over {1..k_max}."""
        kmax = self.hyper.k_max
        if kmax == 1:
            self.k = 1
            self.logB = None
            return
        Z = np.clip(np.ceil(np.outer(self._kvec, self.y)), 1,
                    self._kvec[:, None]).astype(np.int64)
        ll = (self.m * self._lgk1
              - gammaln(Z).sum(axis=1)
              - gammaln(self._kvec[:, None] - Z + 1).sum(axis=1)
              + ((Z - 1) * self.lnx[None, :]).sum(axis=1)
              + ((self._kvec[:, None] - Z) * self.ln1mx[None, :]).sum(axis=1))
        ll -= ll.max()
        w = np.exp(ll)
        cs = np.cumsum(w)
        self.k = int(np.searchsorted(cs, self.rng.random() * cs[-1])) + 1
        self.k = min(self.k, kmax)
        self.logB = None  # kernel cache now stale

    def update_precision(self) -> None:
        """Auxiliary-variable (two-component Gamma mixture) update of alpha."""
        a, b = self.hyper.gamma_shape, self.hyper.gamma_rate
        n, K = self.m, self.C
        eta = self.rng.beta(self.alpha + 1.0, n)
        brate = b - math.log(eta)
        odds = (a + K - 1.0) / (n * brate)
        if self.rng.random() < odds / (1.0 + odds):
            self.alpha = float(self.rng.gamma(a + K, 1.0 / brate))
        else:
            self.alpha = float(self.rng.gamma(a + K - 1.0, 1.0 / brate))
        self.alpha = max(self.alpha, 1e-300)

    def sweep(self) -> None:
        self.refresh_kernel_cache()
        self.update_locations()
        self.remix_cluster_locations()
        self.update_degree()
        self.update_precision()

    def emit_mixture(self) -> tuple[BernsteinMixture, float]:
        """Weights from the conditional mixing CDF: base mass plus atoms."""
        k = self.k
        wstar = _base_bin_masses(self.hyper, k)
        z = _bins(k, self.cl_y[:self.C])
        atom = np.bincount(z - 1, weights=self.cl_n[:self.C].astype(float),
                           minlength=k)
        w = (self.alpha * wstar + atom) / (self.alpha + self.m)
        s = w.sum()
        correction = abs(s - 1.0)
        return BernsteinMixture(k=k, weights=w / s), correction


# -- public operations ----------------------------------------------------

def update_latent_locations(state: GibbsState, data: PointPattern,
                            hyper: Hyperparameters, k: int,
                            rng: np.random.Generator) -> GibbsState:
    s = _Sampler(data, hyper, rng, state=state)
    s.k = int(k)
    s.refresh_kernel_cache()
    s.update_locations()
    return s.snapshot()


def update_k(state: GibbsState, data: PointPattern, hyper: Hyperparameters,
             rng: np.random.Generator) -> GibbsState:
    s = _Sampler(data, hyper, rng, state=state)
    s.update_degree()
    return s.snapshot()


def degree_conditional(state: GibbsState, data: PointPattern,
                       hyper: Hyperparameters) -> np.ndarray:
    """Normalized discrete conditional of k given the latent locations."""
    s = _Sampler(data, hyper, np.random.default_rng(0), state=state)
    kvec = s._kvec
    Z = np.clip(np.ceil(np.outer(kvec, s.y)), 1, kvec[:, None]).astype(np.int64)
    ll = (s.m * s._lgk1
          - gammaln(Z).sum(axis=1)
          - gammaln(kvec[:, None] - Z + 1).sum(axis=1)
          + ((Z - 1) * s.lnx[None, :]).sum(axis=1)
          + ((kvec[:, None] - Z) * s.ln1mx[None, :]).sum(axis=1))
    ll -= ll.max()
    p = np.exp(ll)
    return p / p.sum()


def update_alpha(state: GibbsState, hyper: Hyperparameters, n_clusters: int,
                 n_points: int, rng: np.random.Generator) -> GibbsState:
    if n_clusters < 1 or n_points < 1:
        raise ConfigError("need n_clusters >= 1 and n_points >= 1")
    a, b = hyper.gamma_shape, hyper.gamma_rate
    eta = rng.beta(state.alpha + 1.0, n_points)
    brate = b - math.log(eta)
    odds = (a + n_clusters - 1.0) / (n_points * brate)
    if rng.random() < odds / (1.0 + odds):
        alpha = float(rng.gamma(a + n_clusters, 1.0 / brate))
    else:
        alpha = float(rng.gamma(a + n_clusters - 1.0, 1.0 / brate))
    return GibbsState(latent_locations=state.latent_locations, k=state.k,
                      alpha=max(alpha, 1e-300),
                      cluster_labels=state.cluster_labels)


def fit_posterior(data: PointPattern, hyper: Hyperparameters = Hyperparameters(),
                  mcmc: MCMCConfig = MCMCConfig()) -> PosteriorChain:
    """Run one chain; bit-reproducible given (seed, data, hyper, mcmc)."""
    rng = np.random.default_rng(np.random.SeedSequence(mcmc.seed))
    s = _Sampler(data, hyper, rng)
    keep = set(range(mcmc.burn_in, mcmc.iterations, mcmc.thinning))
    draws: list[BernsteinMixture] = []
    alphas: list[float] = []
    max_corr = 0.0
    for it in range(mcmc.iterations):
        s.sweep()
        if it in keep:
            mix, corr = s.emit_mixture()
            max_corr = max(max_corr, corr)
            draws.append(mix)
            alphas.append(s.alpha)
    return PosteriorChain(draws=draws, alphas=np.array(alphas),
                          seed=mcmc.seed, burn_in=mcmc.burn_in,
                          thinning=mcmc.thinning,
                          total_iterations=mcmc.iterations,
                          max_weight_correction=max_corr)
