import numpy as np
import pytest

from mdgp.exactgp import marginal_loglik_gaussian
from mdgp.exacttarget import ExactMarginalTarget, exact_f_draws
from mdgp.formula import parse_formula
from mdgp.kernelexpr import kernel_matrix
from mdgp.priors import PriorSpec

from tests.helpers import FORMULA, assert_gradient, make_space, random_points


def problem(seed: int, n: int = 20) -> ExactMarginalTarget:
    rng = np.random.default_rng(seed)
    space = make_space(3)
    x = random_points(space, n, rng)
    return ExactMarginalTarget(parse_formula(FORMULA, space), x,
                               rng.normal(size=n), PriorSpec())


def test_gradient() -> None:
    target = problem(0)
    rng = np.random.default_rng(1)
    for _ in range(30):
        assert_gradient(target, 0.5 * rng.normal(size=target.dim))


def test_value() -> None:
    priors = PriorSpec()
    target = problem(2)
    u = np.array([0.1, -0.3, -0.2, 0.4, np.log(0.6)])
    _, theta = target.layout.constrain(u)
    k = kernel_matrix(target.expr, theta, target.x, target.x)
    expected = marginal_loglik_gaussian(k, theta.sigma, target.y) \
        + target.layout.log_prior(u, priors)[0]
    assert target.log_density(u) == pytest.approx(expected)


def test_f_draws() -> None:
    target = problem(3)
    rng = np.random.default_rng(4)
    thetas = [target.layout.constrain(0.3 * rng.normal(size=target.dim))[1]
              for _ in range(4)]
    x_star = random_points(target.expr.space, 6, rng)
    draws = exact_f_draws(target.expr, target.x, target.y, x_star, thetas, rng)
    assert draws.shape == (4, 6)
    assert np.all(np.isfinite(draws))

    same = exact_f_draws(target.expr, target.x, target.y, target.x[:3],
                         thetas[:1], rng)
    assert same.shape == (1, 3)
