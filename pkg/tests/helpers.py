from typing import Callable, List, Sequence, Tuple

import numpy as np

from mdgp.covariates import Categorical, Continuous, CovariateSpace, DimSpec
from mdgp.featuremap import BasisConfig, FeatureMap, build_feature_map
from mdgp.floatarray import FloatArray
from mdgp.formula import parse_formula
from mdgp.target import Target


def make_space(num_categories: int = 3,
               continuous: Sequence[str] = ("age",)) -> CovariateSpace:
    dims: List[DimSpec] = [Continuous(name, -1.0, 1.0)
                           for name in continuous]
    if num_categories > 0:
        labels = tuple(str(c) for c in range(1, num_categories + 1))
        dims.append(Categorical("z", labels))
    return CovariateSpace(tuple(dims))


def random_points(space: CovariateSpace, n: int,
                  rng: np.random.Generator) -> FloatArray:
    columns = []
    for dim in space.dims:
        if isinstance(dim, Continuous):
            columns.append(rng.uniform(dim.observed_min, dim.observed_max,
                                       size=n))
        else:
            columns.append(rng.integers(0, dim.num_categories, size=n)
                           .astype(float))
    return np.column_stack(columns)


def central_difference(func: Callable[[FloatArray], float], u: FloatArray,
                       h: float = 1e-6) -> FloatArray:
    u = np.asarray(u, dtype=float)
    ret = np.zeros(u.size)
    for i in range(u.size):
        step = np.zeros(u.size)
        step[i] = h
        ret[i] = (func(u + step) - func(u - step)) / (2.0 * h)
    return ret


def assert_gradient(target: Target, u: FloatArray, rtol: float = 1e-5,
                    atol: float = 1e-5, h: float = 1e-6) -> None:
    _, grad = target.log_density_gradient(u)
    numeric = central_difference(target.log_density, u, h)
    np.testing.assert_allclose(grad, numeric, rtol=rtol, atol=atol)


FORMULA = "y ~ gp(age) + zs(z)*gp(age)"


def feature_problem(seed: int, n: int = 25, num_basis: int = 6) \
        -> Tuple[FeatureMap, FloatArray]:
    """A small grouped feature map with a Gaussian response."""

    rng = np.random.default_rng(seed)
    space = make_space(3)
    x = random_points(space, n, rng)
    fm = build_feature_map(x, parse_formula(FORMULA, space),
                           BasisConfig(num_basis))
    return fm, rng.normal(size=n)


def random_state(dim: int, num_xi: int,
                 rng: np.random.Generator) -> FloatArray:
    ret: FloatArray = np.concatenate([rng.normal(size=num_xi),
                                      0.5 * rng.normal(size=dim - num_xi)])
    return ret
