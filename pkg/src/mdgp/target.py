from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np

from .floatarray import FloatArray
from .layout import ParameterLayout
from .usererror import KernelSpecError, SingularCovarianceError


class Target(ABC):
    """A differentiable log density on an unconstrained real vector."""

    @property
    @abstractmethod
    def names(self) -> Tuple[str, ...]:
        ...

    @property
    def dim(self) -> int:
        return len(self.names)

    @abstractmethod
    def log_density_gradient(self, u: FloatArray) -> Tuple[float, FloatArray]:
        ...

    def log_density(self, u: FloatArray) -> float:
        return self.log_density_gradient(u)[0]

    def constrained(self, u: FloatArray) -> FloatArray:
        return np.asarray(u, dtype=float)


class LayoutTarget(Target):
    layout: ParameterLayout

    @property
    def names(self) -> Tuple[str, ...]:
        return self.layout.names

    def constrained(self, u: FloatArray) -> FloatArray:
        return self.layout.constrained_vector(u)


def evaluate(target: Target, u: FloatArray) -> Tuple[float, FloatArray]:
    """
    Log density and gradient, with any non-finite value or failed
    factorization mapped to -inf so that the proposal is rejected.
    """

    u = np.asarray(u, dtype=float)
    try:
        with np.errstate(all="ignore"):
            value, grad = target.log_density_gradient(u)
    except (KernelSpecError, SingularCovarianceError, FloatingPointError):
        return -np.inf, np.zeros_like(u)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        return -np.inf, np.zeros_like(u)
    return float(value), grad
