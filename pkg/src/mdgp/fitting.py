from dataclasses import dataclass
import time
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from .config import RunConfig
from .covariates import CovariateSpace
from .dataset import Dataset, Standardization, standardize
from .diagnostics import Diagnostics, compute_diagnostics
from .draws import PosteriorDraws
from .exacttarget import ExactMarginalTarget, exact_f_draws
from .featuremap import FeatureBasis, FeatureMap, build_basis
from .floatarray import FloatArray, IntArray
from .formula import parse_formula
from .hmc import hmc_sample
from .hyperparams import HyperParams
from .kernelexpr import KernelExpr
from .layout import ParameterLayout
from .logger import logger
from .obsmodels import Counts, ObsModel, get_obs_model
from .posterior import ApproximatePosterior
from .predict import (draws_component_at, draws_f_at, long_table,
                      mlpd_from_latent, obs_draws, predictive_from_latent,
                      summarize)
from .usererror import DataError, InsufficientDrawsError
from .woodbury import (MarginalGaussianPosterior, WoodburyTerms,
                       sample_xi_given_theta)


@dataclass(frozen=True, eq=False)
class FittedModel:
    config: RunConfig
    expr: KernelExpr
    basis: FeatureBasis
    model: ObsModel
    standardization: Standardization
    draws: PosteriorDraws
    diagnostics: Optional[Diagnostics]
    seconds: float = 0.0

    @property
    def space(self) -> CovariateSpace:
        return self.expr.space


def try_diagnostics(draws: PosteriorDraws) -> Optional[Diagnostics]:
    try:
        return compute_diagnostics(draws)
    except InsufficientDrawsError as ex:
        logger.warning("Skipping convergence diagnostics: %s", ex)
        return None


def collapse_xi(fm: FeatureMap, y: FloatArray, theta_draws: PosteriorDraws,
                seed: int) -> PosteriorDraws:
    """Attach one xi | theta, y draw to every theta draw."""

    basis = fm.basis
    terms = WoodburyTerms.make(fm, y)
    layout = ParameterLayout.make(basis.expr, ("sigma",), fm.num_columns)
    theta_layout = ParameterLayout.make(basis.expr, ("sigma",), 0)
    # A separate stream from the chains' so the theta draws are unchanged.
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(
        theta_draws.num_chains + 1)[-1])
    values = np.zeros(theta_draws.values.shape[:2] + (layout.dim,))
    for c in range(theta_draws.num_chains):
        for i in range(theta_draws.num_iterations):
            _, theta = theta_layout.split_constrained(
                theta_draws.values[c, i])
            xi = sample_xi_given_theta(terms, basis.sqrt_delta(theta),
                                       theta.sigma, rng)
            values[c, i] = np.concatenate(
                [xi, theta.to_vector(layout.obs_names)])
    return PosteriorDraws(layout.names, values, theta_draws.stats)


def fit_model(config: RunConfig, train: Dataset) -> FittedModel:
    if train.y is None:
        raise DataError("Training data needs a response.")
    start = time.perf_counter()
    ds = standardize(train)
    assert ds.standardization is not None
    expr = parse_formula(config.formula, ds.space, config.categorical)
    basis = build_basis(ds.x, expr, config.basis)
    fm = basis.feature_map(ds.x)
    model = get_obs_model(config.likelihood)
    assert ds.y is not None

    if config.marginalized:
        logger.info("Sampling hyperparameters with xi integrated out.")
        y = np.asarray(ds.y, dtype=float)
        theta_draws = hmc_sample(MarginalGaussianPosterior(fm, y,
                                                           config.priors),
                                 config.sampler)
        draws = collapse_xi(fm, y, theta_draws, config.sampler.seed)
    else:
        draws = hmc_sample(ApproximatePosterior(fm, ds.y, model,
                                                config.priors),
                           config.sampler)
    seconds = time.perf_counter() - start
    logger.info("Fit took %.2f seconds.", seconds)
    return FittedModel(config, expr, basis, model, ds.standardization,
                       draws, try_diagnostics(draws), seconds)


def fit_exact(config: RunConfig, train: Dataset) \
        -> Tuple[KernelExpr, Dataset, PosteriorDraws, float]:
    """Hyperparameter draws of the exact Gaussian-marginal model."""

    if config.likelihood != "gaussian":
        raise DataError("The exact reference model needs the gaussian"
                        " likelihood.")
    start = time.perf_counter()
    ds = standardize(train)
    expr = parse_formula(config.formula, ds.space, config.categorical)
    draws = hmc_sample(ExactMarginalTarget(expr, ds.x, np.asarray(ds.y),
                                           config.priors),
                       config.sampler)
    return expr, ds, draws, time.perf_counter() - start


def exact_mlpd(expr: KernelExpr, train: Dataset, draws: PosteriorDraws,
               test: Dataset, seed: int, method: str = "pointwise") -> float:
    """MLPD of the exact model at the test data, on the data scale."""

    st = train.standardization
    assert st is not None and test.y is not None and train.y is not None
    layout = ParameterLayout.make(expr, ("sigma",), 0)
    thetas: List[HyperParams] = [layout.split_constrained(row)[1]
                                 for row in draws.matrix()]
    x_test = st.transform_x(test.space, test.x)
    f_draws = exact_f_draws(expr, train.x, np.asarray(train.y), x_test,
                            thetas, np.random.default_rng(seed))
    y_test = st.transform_y(test.y)
    return mlpd_from_latent(y_test, f_draws, get_obs_model("gaussian"),
                            thetas, method, st.response_sd)


def standardized_points(fitted: FittedModel, ds: Dataset) -> FloatArray:
    if ds.space.names != fitted.space.names:
        raise DataError("Prediction data covariates %s do not match the"
                        " model's %s.", ", ".join(ds.space.names),
                        ", ".join(fitted.space.names))
    return fitted.standardization.transform_x(fitted.space, ds.x)


def approximate_mlpd(fitted: FittedModel, test: Dataset,
                     method: str = "pointwise") -> float:
    if test.y is None:
        raise DataError("Test data needs a response to score.")
    st = fitted.standardization
    f_draws = draws_f_at(standardized_points(fitted, test), fitted.basis,
                         fitted.model, fitted.draws)
    return mlpd_from_latent(st.transform_y(test.y), f_draws, fitted.model,
                            obs_draws(fitted.basis, fitted.model,
                                      fitted.draws),
                            method, st.response_sd)


def prediction_tables(fitted: FittedModel, ds: Dataset,
                      rng: np.random.Generator,
                      trials: Optional[IntArray] = None) \
        -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Long table of draws and per-point summaries of the total latent
    function, every component and new observations, on the data scale.
    """

    st = fitted.standardization
    points = standardized_points(fitted, ds)
    f_draws = draws_f_at(points, fitted.basis, fitted.model, fitted.draws)
    pieces = [("total", st.inverse_y(f_draws))]
    for j in range(1, fitted.expr.num_terms + 1):
        component = draws_component_at(points, j, fitted.basis, fitted.model,
                                       fitted.draws)
        pieces.append((f"component_{j}", component * st.response_sd))

    if trials is None and isinstance(ds.y, Counts):
        trials = ds.y.trials
    if trials is None:
        trials = ds.trials
    if fitted.model.name == "gaussian" or trials is not None:
        predictive = predictive_from_latent(
            f_draws, fitted.model,
            obs_draws(fitted.basis, fitted.model, fitted.draws), rng, trials)
        if fitted.model.name == "gaussian":
            predictive = st.inverse_y(predictive)
        pieces.append(("predictive", predictive))
    else:
        logger.warning("No trials given; skipping predictive draws.")

    long = pd.concat([long_table(kind, values) for kind, values in pieces],
                     ignore_index=True)
    summary = pd.concat([summarize(kind, values) for kind, values in pieces],
                        ignore_index=True)
    return long, summary
