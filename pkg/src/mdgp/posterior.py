"""
Log posterior of the low-rank model over (xi, theta).

f = Psi_dagger (sqrt(delta(theta)) * xi) with xi ~ N(0, I). Each evaluation
costs one N x M product for f and one for the back-projection of the
likelihood gradient; nothing N x N is formed.
"""

import math
from typing import Tuple

import numpy as np

from .featuremap import FeatureMap, latent_values
from .floatarray import FloatArray
from .layout import ParameterLayout, obs_derivative
from .obsmodels import ObsModel, Response
from .priors import PriorSpec
from .target import LayoutTarget, evaluate
from .usererror import DataError


class ApproximatePosterior(LayoutTarget):
    def __init__(self, fm: FeatureMap, y: Response, model: ObsModel,
                 priors: PriorSpec):
        model.check_response(y)
        if len(y) != fm.num_points:
            raise DataError("Response has %s values but the feature map"
                            " has %s points.", len(y), fm.num_points)
        self.fm = fm
        self.y = y
        self.model = model
        self.priors = priors
        self.layout = ParameterLayout.make(fm.basis.expr,
                                           model.parameter_names,
                                           fm.num_columns)

    def log_density_gradient(self, u: FloatArray) -> Tuple[float, FloatArray]:
        layout = self.layout
        u = np.asarray(u, dtype=float)
        xi, theta = layout.constrain(u)
        basis = self.fm.basis
        psi_dagger = self.fm.psi_dagger

        sqrt_delta = basis.sqrt_delta(theta)
        f = latent_values(psi_dagger, sqrt_delta, xi)
        value = -0.5 * float(xi @ xi) \
            - 0.5 * layout.num_xi * math.log(2.0 * math.pi)
        value += float(np.sum(self.model.loglik(self.y, f, theta.obs)))
        prior, grad = layout.log_prior(u, self.priors)
        value += prior

        g = self.model.dloglik_df(self.y, f, theta.obs)
        h = psi_dagger.T @ g
        grad[layout.xi_slice] += sqrt_delta * h - xi
        grad[layout.kernel_slice] += basis.sqrt_delta_jacobian(theta) @ (xi * h)

        dobs = self.model.dloglik_dobs(self.y, f, theta.obs)
        offset = layout.obs_slice.start
        for i, name in enumerate(layout.obs_names):
            grad[offset + i] += float(np.sum(dobs[name])) \
                * obs_derivative(name, float(u[offset + i]))
        return value, grad


def log_posterior(u: FloatArray, target: ApproximatePosterior) -> float:
    return evaluate(target, u)[0]


def grad_log_posterior(u: FloatArray,
                       target: ApproximatePosterior) -> FloatArray:
    return evaluate(target, u)[1]
