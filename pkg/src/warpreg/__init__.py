"""Bayesian semiparametric registration of phase-varying point processes."""

from .bernstein import (BernsteinMixture, bernstein_cdf, bernstein_pdf,
                        bernstein_quantile, weights_from_cdf)
from .gibbs import (GibbsState, Hyperparameters, MCMCConfig, PosteriorChain,
                    fit_posterior)
from .transport import (MonotoneMap, PointPattern, RegistrationResult,
                        frechet_mean, posterior_summaries, quantile_curve,
                        register, warp_map, wasserstein)

__all__ = [
    "BernsteinMixture", "bernstein_cdf", "bernstein_pdf", "bernstein_quantile",
    "weights_from_cdf", "GibbsState", "Hyperparameters", "MCMCConfig",
    "PosteriorChain", "fit_posterior", "MonotoneMap", "PointPattern",
    "RegistrationResult", "frechet_mean", "posterior_summaries",
    "quantile_curve", "register", "warp_map", "wasserstein",
]

__version__ = "0.1.0"
