"""Desk-scale reproductions of the approximation and scaling claims."""

from pathlib import Path
import tracemalloc
from typing import List

import numpy as np
import pytest
from scipy import stats

from mdgp.benchcli import bench
from mdgp.config import parse_config
from mdgp.dataset import standardize
from mdgp.exactgp import cholesky, exact_predict
from mdgp.featuremap import BasisConfig, build_basis
from mdgp.fitting import fit_model, standardized_points
from mdgp.formula import parse_formula
from mdgp.hmc import SamplerConfig
from mdgp.hyperparams import HyperParams
from mdgp.kernelexpr import kernel_matrix
from mdgp.obsmodels import get_obs_model
from mdgp.posterior import ApproximatePosterior
from mdgp.predict import draws_f_at, obs_draws
from mdgp.priors import PriorSpec
from mdgp.simulate import (FORMULA, NOISE_SD, SCALE, simulate_beta_binomial,
                           simulate_experiment1)
from mdgp.target import evaluate

from tests.helpers import make_space, random_points

pytestmark = pytest.mark.slow


def fixed_theta_gaps(seed: int, num_basis: List[int]) -> List[float]:
    """
    |MLPD_approx - MLPD_exact| at the generating hyperparameters, both
    models conditioned on the same standardized training data.
    """

    data = simulate_experiment1(90, 30, seed)
    train = standardize(data.train)
    st = train.standardization
    assert st is not None and st.response is not None
    assert data.test.y is not None
    x_test = st.transform_x(data.test.space, data.test.x)
    y_train = np.asarray(train.y)
    y_test = np.asarray(st.transform_y(data.test.y))

    age_sd = st.covariates["age"].sd
    alpha = SCALE / st.response.sd
    sigma = SCALE * NOISE_SD / st.response.sd
    theta = HyperParams.make(alpha=[alpha, alpha],
                             ell=[[2.0 / age_sd], [1.0 / age_sd]],
                             sigma=sigma)
    expr = parse_formula(FORMULA, train.space)

    k = kernel_matrix(expr, theta, train.x, train.x)
    chol = cholesky(k + sigma ** 2 * np.eye(k.shape[0]))
    mean, cov = exact_predict(kernel_matrix(expr, theta, x_test, train.x),
                              kernel_matrix(expr, theta, x_test, x_test),
                              chol, y_train, sigma ** 2)
    exact = np.mean(stats.norm.logpdf(y_test, mean, np.sqrt(np.diag(cov))))

    gaps = []
    for b in num_basis:
        basis = build_basis(train.x, expr, BasisConfig(b, 1.5))
        psi = basis.feature_map(train.x).psi(theta)
        z = psi.T @ psi + sigma ** 2 * np.eye(psi.shape[1])
        xi_mean = np.linalg.solve(z, psi.T @ y_train)
        xi_cov = sigma ** 2 * np.linalg.inv(z)
        psi_test = basis.feature_map(x_test).psi(theta)
        f_mean = psi_test @ xi_mean
        f_var = np.einsum("pm,mk,pk->p", psi_test, xi_cov, psi_test)
        approx = np.mean(stats.norm.logpdf(y_test, f_mean,
                                           np.sqrt(f_var + sigma ** 2)))
        gaps.append(abs(float(approx - exact)))
    return gaps


def test_approximation_approaches_exact_model() -> None:
    num_basis = [8, 16, 32]
    gaps = np.mean([fixed_theta_gaps(seed, num_basis)
                    for seed in range(5)], axis=0)
    assert gaps[0] > gaps[2]
    assert gaps[1] <= gaps[0] + 1e-6
    assert gaps[2] <= gaps[1] + 1e-3
    assert gaps[2] < 0.1


def test_beta_binomial_recovers_latent(tmp_path: Path) -> None:
    config = parse_config({
        "formula": "successes ~ gp(age) + zs(z)*gp(age)",
        "likelihood": "beta_binomial",
        "covariates": {"age": "continuous", "z": "categorical"},
        "basis": {"B": 12},
        "sampler": {"chains": 2, "iters": 600, "warmup": 300},
    }, tmp_path)
    coverage = []
    for seed in range(5):
        data = simulate_beta_binomial(30, seed=seed, trials=50)
        fitted = fit_model(config.with_overrides(seed=seed), data.train)
        f_draws = draws_f_at(standardized_points(fitted, data.train),
                             fitted.basis, fitted.model, fitted.draws)
        w0 = np.array([theta.obs["w0"] for theta in
                       obs_draws(fitted.basis, fitted.model, fitted.draws)])
        eta = f_draws + w0[:, None]
        lower, upper = np.quantile(eta, [0.025, 0.975], axis=0)
        inside = (lower <= data.f_train) & (data.f_train <= upper)
        coverage.append(float(np.mean(inside)))
    assert np.mean(coverage) >= 0.9


def test_runtime_scales_linearly() -> None:
    frame = bench([250, 500, 1000], [16], 1.5,
                  SamplerConfig(chains=1, iters=200, warmup=100, seed=0))
    per_gradient = frame["seconds_per_gradient"].to_numpy()
    assert per_gradient[2] / per_gradient[1] < 2.5
    assert per_gradient[1] / per_gradient[0] < 2.5


def test_no_quadratic_memory() -> None:
    n = 10_000
    rng = np.random.default_rng(0)
    space = make_space(3)
    x = random_points(space, n, rng)
    fm = build_basis(x, parse_formula(FORMULA, space),
                     BasisConfig(16)).feature_map(x)
    target = ApproximatePosterior(fm, rng.normal(size=n),
                                  get_obs_model("gaussian"), PriorSpec())
    tracemalloc.start()
    try:
        evaluate(target, np.zeros(target.dim))
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    assert peak < 0.05 * n * n * 8
