"""
Dense exact Gaussian process formulas.

Everything here is O(N^3) on purpose: this module is the reference the
low-rank path is checked against.
"""

from dataclasses import dataclass
import math
from typing import Tuple

import numpy as np
import scipy.linalg

from .floatarray import FloatArray
from .logger import logger
from .usererror import DataError, SingularCovarianceError

JITTER = 1e-8


@dataclass(frozen=True, eq=False)
class Cholesky:
    lower: FloatArray

    @property
    def size(self) -> int:
        return int(self.lower.shape[0])

    def solve(self, b: FloatArray) -> FloatArray:
        ret: FloatArray = scipy.linalg.cho_solve((self.lower, True), b)
        return ret

    def solve_lower(self, b: FloatArray) -> FloatArray:
        ret: FloatArray = scipy.linalg.solve_triangular(self.lower, b,
                                                        lower=True)
        return ret

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def cholesky(matrix: FloatArray) -> Cholesky:
    """Lower Cholesky factor, with one jitter retry of 1e-8 * mean diagonal."""

    matrix = np.asarray(matrix, dtype=float)
    try:
        return Cholesky(scipy.linalg.cholesky(matrix, lower=True))
    except (np.linalg.LinAlgError, ValueError):
        pass

    mean_diag = float(np.mean(np.diag(matrix))) if matrix.size else 0.0
    jitter = JITTER * (mean_diag if mean_diag > 0 else 1.0)
    logger.debug("Cholesky failed, retrying with jitter %.3g.", jitter)
    try:
        return Cholesky(scipy.linalg.cholesky(
            matrix + jitter * np.eye(matrix.shape[0]), lower=True))
    except (np.linalg.LinAlgError, ValueError) as ex:
        raise SingularCovarianceError(
            "Covariance matrix of size %s is not positive definite even"
            " after jitter %.3g: %s", matrix.shape[0], jitter, ex) from ex


def mvn_logpdf_chol(y: FloatArray, chol: Cholesky) -> float:
    n = chol.size
    w = chol.solve_lower(np.asarray(y, dtype=float))
    return -0.5 * n * math.log(2.0 * math.pi) - 0.5 * chol.logdet() \
        - 0.5 * float(w @ w)


def mvn_logpdf(y: FloatArray, sigma: FloatArray) -> float:
    """log N(y | 0, sigma)."""

    return mvn_logpdf_chol(y, cholesky(sigma))


def marginal_loglik_gaussian(k: FloatArray, sigma: float,
                             y: FloatArray) -> float:
    """log N(y | 0, K + sigma^2 I)."""

    k = np.asarray(k, dtype=float)
    return mvn_logpdf(y, k + sigma ** 2 * np.eye(k.shape[0]))


@dataclass(frozen=True, eq=False)
class ExactPosterior:
    mean: FloatArray
    cov: FloatArray
    chol: Cholesky


def exact_posterior_f(k: FloatArray, sigma: float,
                      y: FloatArray) -> ExactPosterior:
    """p(f | theta, y) = N(K Ky^-1 y, K - K Ky^-1 K)."""

    k = np.asarray(k, dtype=float)
    chol = cholesky(k + sigma ** 2 * np.eye(k.shape[0]))
    mean, cov = exact_predict(k, k, chol, y)
    return ExactPosterior(mean, cov, chol)


def exact_predict(k_star: FloatArray, k_star_star: FloatArray,
                  chol: Cholesky, y: FloatArray,
                  noise_variance: float = 0.0) \
        -> Tuple[FloatArray, FloatArray]:
    """
    Predictive mean and covariance of f at test points.

    `k_star` is the P x N test-train kernel, `k_star_star` the P x P test
    kernel and `chol` factors Ky = K + sigma^2 I. A positive
    `noise_variance` gives the predictive distribution of observations.
    """

    k_star = np.atleast_2d(np.asarray(k_star, dtype=float))
    k_star_star = np.atleast_2d(np.asarray(k_star_star, dtype=float))
    p, n = k_star.shape
    if n != chol.size or k_star_star.shape != (p, p) \
       or np.shape(y) != (n,):
        raise DataError(
            "Shape mismatch: K* %r, K** %r, Ky %r, y %r.",
            k_star.shape, k_star_star.shape, (chol.size, chol.size),
            np.shape(y))

    mean: FloatArray = k_star @ chol.solve(np.asarray(y, dtype=float))
    v = chol.solve_lower(k_star.T)
    cov: FloatArray = k_star_star - v.T @ v
    cov = 0.5 * (cov + cov.T)
    if noise_variance > 0:
        cov = cov + noise_variance * np.eye(p)
    return mean, cov


def exact_predict_component(k_star_j: FloatArray, k_star_star_j: FloatArray,
                            chol: Cholesky, y: FloatArray) \
        -> Tuple[FloatArray, FloatArray]:
    """
    Posterior of component j at test points: the component's own kernel
    matrices against the full Ky. Component means sum to the total mean.
    """

    return exact_predict(k_star_j, k_star_star_j, chol, y)
