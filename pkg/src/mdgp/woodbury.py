"""
Gaussian marginal likelihood of the low-rank model via the Woodbury identity.

With Psi = Psi_dagger D, D = diag(sqrt(delta)), and Z = sigma^2 I + Psi^T Psi,

    y^T (Psi Psi^T + sigma^2 I)^-1 y = (y^T y - z^T Z^-1 z) / sigma^2
    log |Psi Psi^T + sigma^2 I| = (N - M) log sigma^2 + log |Z|

where z = Psi^T y. The Gram matrix G = Psi_dagger^T Psi_dagger and the
projection Psi_dagger^T y do not depend on theta and are computed once, so
each evaluation after that is O(M^3).
"""

from dataclasses import dataclass
import math
from typing import Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .featuremap import FeatureMap
from .floatarray import FloatArray
from .hyperparams import HyperParams
from .layout import ParameterLayout
from .obsmodels import Gaussian
from .priors import PriorSpec
from .target import LayoutTarget
from .usererror import ResponseError, SingularCovarianceError


@dataclass(frozen=True, eq=False)
class WoodburyTerms:
    gram: FloatArray
    projection: FloatArray
    yy: float
    num_points: int

    @staticmethod
    def make(fm: FeatureMap, y: FloatArray) -> 'WoodburyTerms':
        y = np.asarray(y, dtype=float)
        Gaussian().check_response(y)
        if y.shape != (fm.num_points,):
            raise ResponseError("Response has shape %r, expected (%s,).",
                                y.shape, fm.num_points)
        psi_dagger = fm.psi_dagger
        return WoodburyTerms(psi_dagger.T @ psi_dagger, psi_dagger.T @ y,
                             float(y @ y), fm.num_points)

    @property
    def num_columns(self) -> int:
        return int(self.gram.shape[0])


def factor_z(terms: WoodburyTerms, sqrt_delta: FloatArray,
             sigma: float) -> Tuple[FloatArray, Tuple[FloatArray, bool]]:
    """Psi^T Psi and the Cholesky factor of Z."""

    psi_gram = terms.gram * np.outer(sqrt_delta, sqrt_delta)
    z_matrix = psi_gram + sigma ** 2 * np.eye(terms.num_columns)
    try:
        factor = cho_factor(z_matrix, lower=True)
    except np.linalg.LinAlgError as ex:
        raise SingularCovarianceError(
            "Woodbury matrix Z of size %s is not positive definite: %s",
            terms.num_columns, ex) from ex
    return psi_gram, factor


def woodbury_loglik(terms: WoodburyTerms, sqrt_delta: FloatArray,
                    sigma: float) -> float:
    _, factor = factor_z(terms, sqrt_delta, sigma)
    return _loglik(terms, sqrt_delta, sigma, factor)[0]


def _loglik(terms: WoodburyTerms, sqrt_delta: FloatArray, sigma: float,
            factor: Tuple[FloatArray, bool]) \
        -> Tuple[float, FloatArray, FloatArray]:
    n = terms.num_points
    m = terms.num_columns
    sigma2 = sigma ** 2
    z = sqrt_delta * terms.projection
    v = cho_solve(factor, z)
    logdet_z = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    quad = (terms.yy - float(z @ v)) / sigma2
    value = -0.5 * n * math.log(2.0 * math.pi) \
        - 0.5 * ((n - m) * math.log(sigma2) + logdet_z) - 0.5 * quad
    return value, z, v


def woodbury_loglik_gradient(terms: WoodburyTerms, sqrt_delta: FloatArray,
                             sigma: float) \
        -> Tuple[float, FloatArray, float]:
    """
    Log likelihood with its derivatives with respect to sqrt(delta) and to
    log sigma.
    """

    n = terms.num_points
    m = terms.num_columns
    sigma2 = sigma ** 2
    psi_gram, factor = factor_z(terms, sqrt_delta, sigma)
    value, z, v = _loglik(terms, sqrt_delta, sigma, factor)

    # u = Psi_dagger^T a with a = (Psi Psi^T + sigma^2 I)^-1 y.
    u = (terms.projection - terms.gram @ (sqrt_delta * v)) / sigma2
    p = sqrt_delta[:, None] * terms.gram
    w = cho_solve(factor, p)
    inv_diag = (np.diag(terms.gram) - np.sum(p * w, axis=0)) / sigma2
    d_sqrt_delta: FloatArray = sqrt_delta * (np.square(u) - inv_diag)

    aa = (terms.yy - 2.0 * float(z @ v) + float(v @ psi_gram @ v)) \
        / sigma2 ** 2
    z_inv = cho_solve(factor, np.eye(m))
    trace_inv = (n - m) / sigma2 + float(np.trace(z_inv))
    d_log_sigma = sigma2 * (aa - trace_inv)
    return value, d_sqrt_delta, d_log_sigma


def marginalized_loglik_woodbury(fm: FeatureMap, theta: HyperParams,
                                 y: FloatArray) -> float:
    """log N(y | 0, Psi Psi^T + sigma^2 I) without forming an N x N matrix."""

    terms = WoodburyTerms.make(fm, y)
    return woodbury_loglik(terms, fm.basis.sqrt_delta(theta), theta.sigma)


class MarginalGaussianPosterior(LayoutTarget):
    """Posterior of theta alone with the xi auxiliaries integrated out."""

    def __init__(self, fm: FeatureMap, y: FloatArray, priors: PriorSpec):
        self.fm = fm
        self.terms = WoodburyTerms.make(fm, y)
        self.priors = priors
        self.layout = ParameterLayout.make(fm.basis.expr, ("sigma",), 0)

    def log_density_gradient(self, u: FloatArray) -> Tuple[float, FloatArray]:
        layout = self.layout
        u = np.asarray(u, dtype=float)
        _, theta = layout.constrain(u)
        basis = self.fm.basis
        value, d_sqrt_delta, d_log_sigma = woodbury_loglik_gradient(
            self.terms, basis.sqrt_delta(theta), theta.sigma)
        prior, grad = layout.log_prior(u, self.priors)
        grad[layout.kernel_slice] += \
            basis.sqrt_delta_jacobian(theta) @ d_sqrt_delta
        grad[layout.obs_slice.start] += d_log_sigma
        return value + prior, grad


def sample_xi_given_theta(terms: WoodburyTerms, sqrt_delta: FloatArray,
                          sigma: float,
                          rng: np.random.Generator) -> FloatArray:
    """Draw xi | theta, y ~ N(Z^-1 Psi^T y, sigma^2 Z^-1)."""

    _, factor = factor_z(terms, sqrt_delta, sigma)
    mean = cho_solve(factor, sqrt_delta * terms.projection)
    noise = solve_triangular(factor[0], rng.standard_normal(terms.num_columns),
                             lower=True, trans='T')
    ret: FloatArray = mean + sigma * noise
    return ret
