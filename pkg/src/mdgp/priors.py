"""
Priors on the hyperparameters, evaluated on the unconstrained scale.

Every log density returned here already includes the log-Jacobian of the
transform from the unconstrained coordinate, and its gradient is taken with
respect to that coordinate.
"""

from dataclasses import dataclass
import math
from typing import Tuple

import numpy as np
from scipy import stats

from .usererror import ConfigError


@dataclass(frozen=True)
class PriorSpec:
    alpha_scale: float = 1.0
    alpha_df: float = 20.0
    ell_mu: float = 0.0
    ell_sigma: float = 1.0
    sigma2_shape: float = 1.0
    sigma2_scale: float = 2.0
    gamma_mu: float = 1.0
    gamma_sigma: float = 1.0
    w0_sd: float = 0.5

    def __post_init__(self) -> None:
        for name in ("alpha_scale", "alpha_df", "ell_sigma", "sigma2_shape",
                     "sigma2_scale", "gamma_sigma", "w0_sd"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError("Prior setting %s must be positive,"
                                  " got %r.", name, value)

    def log_alpha(self, u: float) -> Tuple[float, float]:
        """Half Student-t on alpha = exp(u)."""

        alpha = math.exp(u)
        nu = self.alpha_df
        s = self.alpha_scale
        value = float(stats.t.logpdf(alpha, nu, scale=s)) + math.log(2.0) + u
        grad = -(nu + 1.0) * alpha * alpha / (nu * s * s + alpha * alpha) + 1.0
        return value, grad

    def log_ell(self, u: float) -> Tuple[float, float]:
        """Log-normal on ell = exp(u)."""

        ell = math.exp(u)
        value = float(stats.lognorm.logpdf(ell, self.ell_sigma,
                                           scale=math.exp(self.ell_mu))) + u
        grad = -(u - self.ell_mu) / self.ell_sigma ** 2
        return value, grad

    def log_sigma(self, u: float) -> Tuple[float, float]:
        """Inverse-gamma on sigma^2, with sigma = exp(u)."""

        sigma2 = math.exp(2.0 * u)
        a = self.sigma2_shape
        b = self.sigma2_scale
        value = float(stats.invgamma.logpdf(sigma2, a, scale=b)) \
            + math.log(2.0) + 2.0 * u
        grad = -2.0 * a + 2.0 * b / sigma2
        return value, grad

    def log_gamma(self, u: float) -> Tuple[float, float]:
        """Log-normal on gamma = inv-logit(u), restricted to (0, 1)."""

        gamma = float(1.0 / (1.0 + np.exp(-u)))
        gamma_c = float(1.0 / (1.0 + np.exp(u)))
        log_gamma = -float(np.logaddexp(0.0, -u))
        log_gamma_c = -float(np.logaddexp(0.0, u))
        value = float(stats.lognorm.logpdf(gamma, self.gamma_sigma,
                                           scale=math.exp(self.gamma_mu))) \
            + log_gamma + log_gamma_c
        grad = -(log_gamma - self.gamma_mu) * gamma_c / self.gamma_sigma ** 2 \
            - gamma
        return value, grad

    def log_w0(self, u: float) -> Tuple[float, float]:
        value = float(stats.norm.logpdf(u, 0.0, self.w0_sd))
        grad = -u / self.w0_sd ** 2
        return value, grad

    def log_obs(self, name: str, u: float) -> Tuple[float, float]:
        if name == "sigma":
            return self.log_sigma(u)
        elif name == "gamma":
            return self.log_gamma(u)
        elif name == "w0":
            return self.log_w0(u)
        else:
            raise ConfigError("No prior for observation parameter %r.", name)
