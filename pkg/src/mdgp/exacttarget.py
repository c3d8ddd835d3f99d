"""
Exact Gaussian-marginal posterior over theta, the reference model that the
low-rank approximation is compared against.
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np

from .exactgp import cholesky, exact_predict
from .floatarray import FloatArray
from .hyperparams import HyperParams
from .kernelexpr import KernelExpr, check_points, kernel_matrix, term_matrix
from .layout import ParameterLayout
from .obsmodels import Gaussian
from .priors import PriorSpec
from .target import LayoutTarget


class ExactMarginalTarget(LayoutTarget):
    """log p(y | theta) + log p(theta) with y ~ N(0, K + sigma^2 I)."""

    def __init__(self, expr: KernelExpr, x: FloatArray, y: FloatArray,
                 priors: PriorSpec):
        self.expr = expr
        self.x = check_points(expr.space, x)
        self.y = np.asarray(y, dtype=float)
        Gaussian().check_response(self.y)
        self.priors = priors
        self.layout = ParameterLayout.make(expr, ("sigma",), 0)
        self.squared_distances: Dict[str, FloatArray] = {}
        for term in expr.terms:
            for eq in term.continuous_factors:
                if eq.dim not in self.squared_distances:
                    col = self.x[:, expr.space.index(eq.dim)]
                    self.squared_distances[eq.dim] = \
                        np.square(np.subtract.outer(col, col))

    def log_density_gradient(self, u: FloatArray) -> Tuple[float, FloatArray]:
        layout = self.layout
        u = np.asarray(u, dtype=float)
        _, theta = layout.constrain(u)
        n = self.y.size
        parts = [term_matrix(self.expr, theta, j, self.x, self.x)
                 for j in range(self.expr.num_terms)]
        sigma2 = theta.sigma ** 2
        chol = cholesky(sum(parts) + sigma2 * np.eye(n))
        a = chol.solve(self.y)
        value = -0.5 * n * np.log(2.0 * np.pi) - 0.5 * chol.logdet() \
            - 0.5 * float(self.y @ a)

        # d log p / d theta = 1/2 tr((a a^T - Ky^-1) dKy / d theta)
        weight = np.outer(a, a) - chol.solve(np.eye(n))
        kernel_grad: List[float] = []
        for j, term in enumerate(self.expr.terms):
            kernel_grad.append(float(np.sum(weight * parts[j])))
            for eq, ell in zip(term.continuous_factors, theta.ell[j]):
                scaled = self.squared_distances[eq.dim] / float(ell) ** 2
                kernel_grad.append(0.5 * float(np.sum(weight * parts[j]
                                                      * scaled)))

        prior, grad = layout.log_prior(u, self.priors)
        grad[layout.kernel_slice] += np.asarray(kernel_grad)
        grad[layout.obs_slice.start] += sigma2 * float(np.trace(weight))
        return float(value) + prior, grad


def exact_f_draws(expr: KernelExpr, x: FloatArray, y: FloatArray,
                  x_star: FloatArray, thetas: Sequence[HyperParams],
                  rng: np.random.Generator) -> FloatArray:
    """
    One draw of f at `x_star` from p(f* | theta, y) per theta, as an S x P
    matrix.
    """

    x = check_points(expr.space, x)
    x_star = check_points(expr.space, x_star)
    y = np.asarray(y, dtype=float)
    ret = np.zeros((len(thetas), x_star.shape[0]))
    for s, theta in enumerate(thetas):
        k = kernel_matrix(expr, theta, x, x)
        chol = cholesky(k + theta.sigma ** 2 * np.eye(y.size))
        mean, cov = exact_predict(kernel_matrix(expr, theta, x_star, x),
                                  kernel_matrix(expr, theta, x_star, x_star),
                                  chol, y)
        # Posterior covariances at training points are close to singular.
        w, v = np.linalg.eigh(cov)
        ret[s] = mean + v @ (np.sqrt(np.clip(w, 0.0, None))
                              * rng.standard_normal(mean.size))
    return ret
