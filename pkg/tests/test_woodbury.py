import math

import numpy as np
import pytest

from mdgp.exactgp import mvn_logpdf
from mdgp.featuremap import BasisConfig, build_feature_map
from mdgp.formula import parse_formula
from mdgp.hyperparams import HyperParams
from mdgp.priors import PriorSpec
from mdgp.usererror import ResponseError
from mdgp.woodbury import MarginalGaussianPosterior, WoodburyTerms, \
    marginalized_loglik_woodbury, sample_xi_given_theta

from tests.helpers import assert_gradient, feature_problem, make_space, \
    random_points


def test_matches_dense_likelihood() -> None:
    rng = np.random.default_rng(0)
    space = make_space(0)
    expr = parse_formula("y ~ gp(age)", space)
    for _ in range(50):
        n = int(rng.integers(5, 51))
        x = random_points(space, n, rng)
        fm = build_feature_map(x, expr, BasisConfig(int(rng.integers(2, 11))))
        theta = HyperParams.make(alpha=[rng.uniform(0.3, 2.0)],
                                 ell=[[rng.uniform(0.2, 2.0)]],
                                 sigma=rng.uniform(0.1, 1.5))
        y = rng.normal(size=n)
        psi = fm.psi(theta)
        dense = mvn_logpdf(y, psi @ psi.T + theta.sigma ** 2 * np.eye(n))
        got = marginalized_loglik_woodbury(fm, theta, y)
        assert got == pytest.approx(dense, rel=1e-6)


def test_grouped_model_matches_dense_likelihood() -> None:
    fm, y = feature_problem(1, n=40)
    theta = HyperParams.make(alpha=[0.9, 1.4], ell=[[0.6], [1.1]], sigma=0.3)
    psi = fm.psi(theta)
    dense = mvn_logpdf(y, psi @ psi.T + 0.09 * np.eye(40))
    assert marginalized_loglik_woodbury(fm, theta, y) == \
        pytest.approx(dense, rel=1e-6)


def test_zero_features_is_pure_noise() -> None:
    fm, y = feature_problem(2)
    sigma = 0.7
    theta = HyperParams.make(alpha=[1e-200, 1e-200], ell=[[1.0], [1.0]],
                             sigma=sigma)
    n = y.size
    expected = -0.5 * n * math.log(2 * math.pi * sigma ** 2) \
        - float(y @ y) / (2 * sigma ** 2)
    assert marginalized_loglik_woodbury(fm, theta, y) == \
        pytest.approx(expected)


def test_marginal_gradient() -> None:
    fm, y = feature_problem(3)
    target = MarginalGaussianPosterior(fm, y, PriorSpec())
    assert target.names == ("alpha[1]", "ell[1,age]", "alpha[2]",
                            "ell[2,age]", "sigma")
    rng = np.random.default_rng(13)
    for _ in range(100):
        assert_gradient(target, 0.5 * rng.normal(size=target.dim))


def test_conditional_draws() -> None:
    fm, y = feature_problem(4, num_basis=3)
    theta = HyperParams.make(alpha=[1.0, 0.8], ell=[[0.9], [1.2]], sigma=0.5)
    terms = WoodburyTerms.make(fm, y)
    sqrt_delta = fm.basis.sqrt_delta(theta)
    psi = fm.psi(theta)
    z = psi.T @ psi + 0.25 * np.eye(fm.num_columns)
    mean = np.linalg.solve(z, psi.T @ y)
    cov = 0.25 * np.linalg.inv(z)

    rng = np.random.default_rng(5)
    draws = np.array([sample_xi_given_theta(terms, sqrt_delta, 0.5, rng)
                      for _ in range(20000)])
    se = np.sqrt(np.diag(cov) / draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 5 * se)
    np.testing.assert_allclose(np.cov(draws.T), cov, atol=0.05 * np.max(cov))


def test_response_shape() -> None:
    fm, y = feature_problem(5)
    with pytest.raises(ResponseError):
        WoodburyTerms.make(fm, y[:-2])
