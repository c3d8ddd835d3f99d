"""
Posterior draws of the latent function, of its additive components and of
new observations, and the mean log predictive density of test data.
"""

import math
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from .draws import PosteriorDraws
from .featuremap import FeatureBasis, latent_values
from .floatarray import FloatArray, IntArray
from .hyperparams import HyperParams
from .layout import ParameterLayout
from .logger import logger
from .obsmodels import Counts, ObsModel, Response
from .usererror import DataError, ResponseError

MLPD_METHODS = ("pointwise", "mixture")


def draw_layout(basis: FeatureBasis, model: ObsModel,
                draws: PosteriorDraws) -> ParameterLayout:
    layout = ParameterLayout.make(basis.expr, model.parameter_names,
                                  basis.num_columns)
    if tuple(draws.names) != layout.names:
        raise DataError("Draws hold %s parameters that do not match the"
                        " model's %s.", len(draws.names), layout.dim)
    return layout


def iterate_draws(layout: ParameterLayout, draws: PosteriorDraws) \
        -> Iterator[Tuple[FloatArray, HyperParams]]:
    for row in draws.matrix():
        yield layout.split_constrained(row)


def warn_out_of_domain(basis: FeatureBasis, points: FloatArray) -> int:
    count = basis.out_of_domain(points)
    if count:
        logger.warning("%s of %s prediction points lie outside the"
                       " approximation domain [-L, L]; the expansion is"
                       " unreliable there.", count, np.shape(points)[0])
    return count


def draws_f_at(points: FloatArray, basis: FeatureBasis, model: ObsModel,
               draws: PosteriorDraws,
               columns: Optional[slice] = None) -> FloatArray:
    """S x P draws of f (or of the column block `columns`) at `points`."""

    layout = draw_layout(basis, model, draws)
    psi_dagger = basis.evaluate(points)
    warn_out_of_domain(basis, points)
    ret = np.zeros((draws.num_draws, psi_dagger.shape[0]))
    for s, (xi, theta) in enumerate(iterate_draws(layout, draws)):
        ret[s] = latent_values(psi_dagger, basis.sqrt_delta(theta), xi,
                               columns)
    return ret


def draws_component_at(points: FloatArray, j: int, basis: FeatureBasis,
                       model: ObsModel, draws: PosteriorDraws) -> FloatArray:
    """Draws of component j (1-based) at `points`."""

    if not 1 <= j <= basis.expr.num_terms:
        raise DataError("Component index %s out of range 1..%s.", j,
                        basis.expr.num_terms)
    return draws_f_at(points, basis, model, draws,
                      basis.component_slices[j - 1])


def obs_draws(basis: FeatureBasis, model: ObsModel,
              draws: PosteriorDraws) -> List[HyperParams]:
    layout = draw_layout(basis, model, draws)
    return [theta for _, theta in iterate_draws(layout, draws)]


def predictive_from_latent(f_draws: FloatArray, model: ObsModel,
                           thetas: List[HyperParams],
                           rng: np.random.Generator,
                           trials: Optional[IntArray] = None) -> FloatArray:
    if model.name != "gaussian" and trials is None:
        raise ResponseError("Beta-binomial prediction needs a trials count"
                            " for every point.")
    if trials is not None and np.shape(trials) != f_draws.shape[1:]:
        raise ResponseError("Got %s trials counts for %s points.",
                            np.size(trials), f_draws.shape[1])
    ret = np.zeros_like(f_draws)
    for s, theta in enumerate(thetas):
        ret[s] = model.sample(f_draws[s], theta.obs, rng, trials)
    return ret


def draws_predictive(points: FloatArray, basis: FeatureBasis,
                     model: ObsModel, draws: PosteriorDraws,
                     rng: np.random.Generator,
                     trials: Optional[IntArray] = None) -> FloatArray:
    f_draws = draws_f_at(points, basis, model, draws)
    return predictive_from_latent(f_draws, model,
                                  obs_draws(basis, model, draws), rng, trials)


def mlpd_from_latent(y: Response, f_draws: FloatArray, model: ObsModel,
                     thetas: List[HyperParams], method: str = "pointwise",
                     response_scale: float = 1.0) -> float:
    """
    Mean log predictive density of `y` given S x P latent draws.

    "pointwise" averages log p(y_p | f_sp, theta_s) over draws and points.
    "mixture" averages over points the log of the draw-averaged density.
    A Gaussian model fit to y / response_scale is scored on the scale of y.
    """

    if method not in MLPD_METHODS:
        raise DataError("Unknown MLPD method %r (choose from %s).", method,
                        ", ".join(MLPD_METHODS))
    num_draws, num_points = f_draws.shape
    if len(y) != num_points:
        raise ResponseError("Got %s test responses for %s points.",
                            len(y), num_points)
    lp = np.zeros((num_draws, num_points))
    for s, theta in enumerate(thetas):
        lp[s] = model.loglik(y, f_draws[s], theta.obs)
    if not isinstance(y, Counts):
        lp -= math.log(response_scale)

    if method == "pointwise":
        return float(np.mean(lp))
    return float(np.mean(logsumexp(lp, axis=0) - math.log(num_draws)))


def mlpd(y: Response, points: FloatArray, basis: FeatureBasis,
         model: ObsModel, draws: PosteriorDraws, method: str = "pointwise",
         response_scale: float = 1.0) -> float:
    f_draws = draws_f_at(points, basis, model, draws)
    return mlpd_from_latent(y, f_draws, model,
                            obs_draws(basis, model, draws), method,
                            response_scale)


def summarize(kind: str, values: FloatArray) -> pd.DataFrame:
    """Per point mean, sd and the mean +- 2 sd band of S x P draws."""

    mean = np.mean(values, axis=0)
    sd = np.std(values, axis=0, ddof=1) if values.shape[0] > 1 \
        else np.zeros(values.shape[1])
    return pd.DataFrame({
        "point_id": np.arange(1, values.shape[1] + 1),
        "kind": kind,
        "mean": mean,
        "sd": sd,
        "lower": mean - 2.0 * sd,
        "upper": mean + 2.0 * sd,
    })


def long_table(kind: str, values: FloatArray) -> pd.DataFrame:
    draw, point = np.divmod(np.arange(values.size), values.shape[1])
    return pd.DataFrame({
        "draw": draw + 1,
        "point_id": point + 1,
        "kind": kind,
        "value": values.reshape(-1),
    })
