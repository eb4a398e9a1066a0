"""Random Bernstein polynomial mixtures: CDF, density, quantiles, weight maps.

A mixture of degree k is the density sum_i w_i * beta(t | i, k-i+1) with
(w_1, ..., w_k) on the unit simplex.  The distribution function is evaluated
through the binomial-tail identity

    P(Beta(i, k-i+1) <= t) = P(Binomial(k, t) >= i),

which is closed form for the integer shape parameters that arise here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

SIMPLEX_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside [0,1] or an otherwise invalid input."""


class NonConvergenceError(RuntimeError):
    """Quantile bracketing failed to shrink; mixture is malformed."""


@dataclass(frozen=True)
class BernsteinMixture:
    """A draw (k, w_1..w_k) defining a Bernstein polynomial density."""

    k: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if self.k < 1:
            raise DomainError(f"degree must be >= 1, got {self.k}")
        if w.shape != (self.k,):
            raise DomainError(f"expected {self.k} weights, got shape {w.shape}")
        if np.any(w < -SIMPLEX_TOL):
            raise DomainError("negative mixture weight")
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise DomainError(f"weights sum to {w.sum()!r}, not 1")

    def to_dict(self) -> dict:
        return {"k": int(self.k), "weights": [float(w) for w in self.weights]}

    @classmethod
    def from_dict(cls, d: dict) -> "BernsteinMixture":
        return cls(k=int(d["k"]), weights=np.asarray(d["weights"], dtype=float))


def _check_unit(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainError("argument outside [0,1]")
    return t


def bernstein_cdf(t, mix: BernsteinMixture):
    """B(t | k, G) = sum_i w_i * P(Beta(i, k-i+1) <= t), via binomial tails."""
    t = _check_unit(t)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t)
    i = np.arange(1, mix.k + 1)
    # P(Binomial(k, t) >= i) = sf at i-1
    tails = stats.binom.sf(i[None, :] - 1, mix.k, tt[:, None])
    out = np.clip(tails @ mix.weights, 0.0, 1.0)
    out[tt == 0.0] = 0.0
    out[tt == 1.0] = 1.0
    return float(out[0]) if scalar else out


def bernstein_pdf(t, mix: BernsteinMixture):
    """b(t | k, G) = sum_i w_i * beta(t | i, k-i+1)."""
    t = _check_unit(t)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t)
    i = np.arange(1, mix.k + 1)
    dens = stats.beta.pdf(tt[:, None], i[None, :], mix.k - i[None, :] + 1)
    out = dens @ mix.weights
    return float(out[0]) if scalar else out


def bernstein_quantile(p: float, mix: BernsteinMixture, tol: float = 1e-10,
                       max_iter: int = 200) -> float:
    """Invert the mixture CDF by bisection; returns 0 for p=0 and 1 for p=1."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability {p} outside [0,1]")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        c = bernstein_cdf(mid, mix)
        if abs(c - p) <= tol:
            return mid
        if c < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * np.finfo(float).eps:
            break
    if abs(bernstein_cdf(0.5 * (lo + hi), mix) - p) > max(tol, 1e-8):
        raise NonConvergenceError(
            f"bisection stalled at bracket [{lo}, {hi}] for p={p}")
    return 0.5 * (lo + hi)


def weights_from_cdf(G: Callable[[float], float], k: int) -> BernsteinMixture:
    """Weights w_i = G(i/k) - G((i-1)/k) of the mixture induced by a base CDF."""
    if k < 1:
        raise DomainError(f"degree must be >= 1, got {k}")
    vals = np.array([G(i / k) for i in range(k + 1)], dtype=float)
    w = np.diff(vals)
    if np.any(w < -SIMPLEX_TOL):
        raise DomainError("base CDF is not nondecreasing on the grid")
    w = np.clip(w, 0.0, None)
    s = w.sum()
    if s <= 0:
        raise DomainError("base CDF increments sum to zero")
    return BernsteinMixture(k=k, weights=w / s)
