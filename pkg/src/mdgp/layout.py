"""
Packing of sampler coordinates.

Unconstrained vector: [xi_1..xi_M, log alpha_1, log ell_1.., log alpha_2,
..., obs...] where sigma is sampled as log sigma, gamma as logit gamma and
w0 as is. Constrained draws use the same order with the transforms undone.
"""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.special import expit, logit

from .floatarray import FloatArray
from .hyperparams import HyperParams
from .kernelexpr import KernelExpr
from .priors import PriorSpec
from .usererror import ConfigError

OBS_TRANSFORMS: Dict[str, str] = {
    "sigma": "log",
    "gamma": "logit",
    "w0": "identity",
}


def constrain_obs(name: str, u: float) -> float:
    kind = OBS_TRANSFORMS[name]
    if kind == "log":
        return float(np.exp(u))
    elif kind == "logit":
        return float(expit(u))
    else:
        return float(u)


def unconstrain_obs(name: str, value: float) -> float:
    kind = OBS_TRANSFORMS[name]
    if kind == "log":
        return float(np.log(value))
    elif kind == "logit":
        if not 0 < value < 1:
            raise ConfigError("Parameter %s must lie in (0, 1), got %r.",
                              name, value)
        return float(logit(value))
    else:
        return float(value)


def obs_derivative(name: str, u: float) -> float:
    """d(constrained)/d(unconstrained) for an observation parameter."""

    kind = OBS_TRANSFORMS[name]
    if kind == "log":
        return float(np.exp(u))
    elif kind == "logit":
        g = float(expit(u))
        return g * (1.0 - g)
    else:
        return 1.0


@dataclass(frozen=True)
class ParameterLayout:
    num_xi: int
    counts: Tuple[int, ...]
    kernel_names: Tuple[str, ...]
    obs_names: Tuple[str, ...]

    @staticmethod
    def make(expr: KernelExpr, obs_names: Sequence[str],
             num_xi: int) -> 'ParameterLayout':
        for name in obs_names:
            if name not in OBS_TRANSFORMS:
                raise ConfigError("Unknown observation parameter %r.", name)
        return ParameterLayout(num_xi, expr.continuous_counts,
                               expr.parameter_names(), tuple(obs_names))

    @property
    def num_kernel(self) -> int:
        return len(self.kernel_names)

    @property
    def dim(self) -> int:
        return self.num_xi + self.num_kernel + len(self.obs_names)

    @property
    def xi_slice(self) -> slice:
        return slice(0, self.num_xi)

    @property
    def kernel_slice(self) -> slice:
        return slice(self.num_xi, self.num_xi + self.num_kernel)

    @property
    def obs_slice(self) -> slice:
        return slice(self.num_xi + self.num_kernel, self.dim)

    @property
    def alpha_positions(self) -> Tuple[int, ...]:
        """Positions of the log alpha coordinates within the kernel block."""

        ret = []
        pos = 0
        for q in self.counts:
            ret.append(pos)
            pos += 1 + q
        return tuple(ret)

    @property
    def names(self) -> Tuple[str, ...]:
        xi = tuple(f"xi[{m}]" for m in range(1, self.num_xi + 1))
        return xi + self.kernel_names + self.obs_names

    def constrain(self, u: FloatArray) -> Tuple[FloatArray, HyperParams]:
        u = np.asarray(u, dtype=float)
        xi = u[self.xi_slice]
        kernel = np.exp(u[self.kernel_slice])
        obs = [constrain_obs(name, float(v))
               for name, v in zip(self.obs_names, u[self.obs_slice])]
        theta = HyperParams.from_vector(self.counts, self.obs_names,
                                        np.concatenate([kernel, obs]))
        return xi, theta

    def unconstrain(self, xi: FloatArray, theta: HyperParams) -> FloatArray:
        kernel = theta.to_vector(())
        obs = [unconstrain_obs(name, theta.obs[name])
               for name in self.obs_names]
        return np.concatenate([np.asarray(xi, dtype=float).reshape(-1),
                               np.log(kernel), obs])

    def constrained_vector(self, u: FloatArray) -> FloatArray:
        xi, theta = self.constrain(u)
        return np.concatenate([xi, theta.to_vector(self.obs_names)])

    def split_constrained(self, v: FloatArray) \
            -> Tuple[FloatArray, HyperParams]:
        v = np.asarray(v, dtype=float)
        xi = v[self.xi_slice]
        theta = HyperParams.from_vector(self.counts, self.obs_names,
                                        v[self.num_xi:])
        return xi, theta

    def log_prior(self, u: FloatArray, priors: PriorSpec) \
            -> Tuple[float, FloatArray]:
        """
        Log prior of the hyperparameters plus log-Jacobians, and its gradient
        over the full unconstrained vector (zero on the xi block).
        """

        u = np.asarray(u, dtype=float)
        grad = np.zeros(self.dim)
        value = 0.0
        offset = self.num_xi
        alpha_positions = set(self.alpha_positions)
        for i in range(self.num_kernel):
            if i in alpha_positions:
                v, g = priors.log_alpha(float(u[offset + i]))
            else:
                v, g = priors.log_ell(float(u[offset + i]))
            value += v
            grad[offset + i] = g
        offset = self.obs_slice.start
        for i, name in enumerate(self.obs_names):
            v, g = priors.log_obs(name, float(u[offset + i]))
            value += v
            grad[offset + i] = g
        return value, grad
