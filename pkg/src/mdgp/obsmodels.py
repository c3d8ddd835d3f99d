"""
Observation models p(y_n | f_n, theta_obs).

All functions are vectorized over data points and return pointwise
values; the full-data log likelihood is their sum.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
import math
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np
from scipy.special import betaln, digamma, expit, gammaln

from .floatarray import FloatArray, IntArray
from .usererror import ResponseError


@dataclass(frozen=True, eq=False)
class Counts:
    """Beta-binomial response: successes out of trials per point."""

    successes: IntArray
    trials: IntArray

    def __post_init__(self) -> None:
        successes = np.asarray(self.successes)
        trials = np.asarray(self.trials)
        if successes.shape != trials.shape:
            raise ResponseError("Successes and trials differ in shape:"
                                " %r vs %r.", successes.shape, trials.shape)
        if np.any(successes != np.round(successes)) \
           or np.any(trials != np.round(trials)):
            raise ResponseError("Counts must be integers.")
        if np.any(successes < 0) or np.any(trials < successes):
            raise ResponseError("Counts need 0 <= successes <= trials.")
        object.__setattr__(self, "successes", successes.astype(np.int64))
        object.__setattr__(self, "trials", trials.astype(np.int64))

    def __len__(self) -> int:
        return int(self.successes.size)

    def subset(self, index: Union[slice, IntArray]) -> 'Counts':
        return Counts(self.successes[index], self.trials[index])


Response = Union[FloatArray, Counts]


class ObsModel(ABC):
    name: str
    parameter_names: Tuple[str, ...]

    @abstractmethod
    def check_response(self, y: Response) -> None:
        ...

    @abstractmethod
    def loglik(self, y: Response, f: FloatArray,
               obs: Mapping[str, float]) -> FloatArray:
        ...

    @abstractmethod
    def dloglik_df(self, y: Response, f: FloatArray,
                   obs: Mapping[str, float]) -> FloatArray:
        ...

    @abstractmethod
    def dloglik_dobs(self, y: Response, f: FloatArray,
                     obs: Mapping[str, float]) -> Dict[str, FloatArray]:
        """Pointwise derivatives with respect to each observation parameter."""

    @abstractmethod
    def sample(self, f: FloatArray, obs: Mapping[str, float],
               rng: np.random.Generator,
               trials: Optional[IntArray] = None) -> FloatArray:
        ...


class Gaussian(ObsModel):
    name = "gaussian"
    parameter_names = ("sigma",)

    def check_response(self, y: Response) -> None:
        if isinstance(y, Counts):
            raise ResponseError("Gaussian model needs a real response,"
                                " got counts.")
        if not np.all(np.isfinite(y)):
            raise ResponseError("Gaussian response has non-finite values.")

    def loglik(self, y: Response, f: FloatArray,
               obs: Mapping[str, float]) -> FloatArray:
        self.check_response(y)
        sigma = obs["sigma"]
        r = (np.asarray(y) - f) / sigma
        ret: FloatArray = -0.5 * math.log(2.0 * math.pi) - math.log(sigma) \
            - 0.5 * np.square(r)
        return ret

    def dloglik_df(self, y: Response, f: FloatArray,
                   obs: Mapping[str, float]) -> FloatArray:
        self.check_response(y)
        ret: FloatArray = (np.asarray(y) - f) / obs["sigma"] ** 2
        return ret

    def dloglik_dobs(self, y: Response, f: FloatArray,
                     obs: Mapping[str, float]) -> Dict[str, FloatArray]:
        self.check_response(y)
        sigma = obs["sigma"]
        r2 = np.square(np.asarray(y) - f)
        return {"sigma": -1.0 / sigma + r2 / sigma ** 3}

    def sample(self, f: FloatArray, obs: Mapping[str, float],
               rng: np.random.Generator,
               trials: Optional[IntArray] = None) -> FloatArray:
        ret: FloatArray = rng.normal(f, obs["sigma"])
        return ret


class BetaBinomial(ObsModel):
    """
    Beta-binomial counts with rho = inv-logit(f + w0),
    a = rho (1/gamma - 1) and b = (1 - rho)(1/gamma - 1).
    """

    name = "beta_binomial"
    parameter_names = ("gamma", "w0")

    def check_response(self, y: Response) -> None:
        if not isinstance(y, Counts):
            raise ResponseError("Beta-binomial model needs counts"
                                " (successes and trials).")

    @staticmethod
    def shape(f: FloatArray, obs: Mapping[str, float]) \
            -> Tuple[FloatArray, FloatArray, FloatArray, FloatArray, float]:
        gamma = obs["gamma"]
        eta = np.asarray(f, dtype=float) + obs["w0"]
        # expit of both signs keeps rho and 1 - rho accurate for large |eta|.
        rho = expit(eta)
        rho_c = expit(-eta)
        t = 1.0 / gamma - 1.0
        return rho, rho_c, rho * t, rho_c * t, t

    def loglik(self, y: Response, f: FloatArray,
               obs: Mapping[str, float]) -> FloatArray:
        self.check_response(y)
        assert isinstance(y, Counts)
        k = y.successes
        n = y.trials
        _, _, a, b, t = self.shape(f, obs)
        if not t > 0:
            ret: FloatArray = np.full(np.shape(f), -np.inf)
            return ret
        ret = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) \
            + betaln(k + a, n - k + b) - betaln(a, b)
        return ret

    def dloglik_df(self, y: Response, f: FloatArray,
                   obs: Mapping[str, float]) -> FloatArray:
        self.check_response(y)
        assert isinstance(y, Counts)
        k = y.successes
        n = y.trials
        rho, rho_c, a, b, t = self.shape(f, obs)
        ret: FloatArray = t * rho * rho_c * (
            digamma(k + a) - digamma(a) - digamma(n - k + b) + digamma(b))
        return ret

    def dloglik_dobs(self, y: Response, f: FloatArray,
                     obs: Mapping[str, float]) -> Dict[str, FloatArray]:
        self.check_response(y)
        assert isinstance(y, Counts)
        k = y.successes
        n = y.trials
        rho, rho_c, a, b, t = self.shape(f, obs)
        dt = rho * (digamma(k + a) - digamma(a)) \
            + rho_c * (digamma(n - k + b) - digamma(b)) \
            - digamma(n + t) + digamma(t)
        gamma = obs["gamma"]
        return {"gamma": -dt / gamma ** 2,
                "w0": self.dloglik_df(y, f, obs)}

    def sample(self, f: FloatArray, obs: Mapping[str, float],
               rng: np.random.Generator,
               trials: Optional[IntArray] = None) -> FloatArray:
        if trials is None:
            raise ResponseError("Beta-binomial prediction needs a trials"
                                " count for every point.")
        _, _, a, b, _ = self.shape(f, obs)
        p = rng.beta(a, b)
        ret: FloatArray = rng.binomial(np.asarray(trials), p).astype(float)
        return ret


OBS_MODELS: Dict[str, ObsModel] = {
    Gaussian.name: Gaussian(),
    BetaBinomial.name: BetaBinomial(),
}


def get_obs_model(name: str) -> ObsModel:
    try:
        return OBS_MODELS[name]
    except KeyError:
        raise ResponseError("Unknown likelihood %r (choose from %s).",
                            name, ", ".join(OBS_MODELS)) from None


def loglik_point(model: ObsModel, y: Response, f: FloatArray,
                 obs: Mapping[str, float]) -> FloatArray:
    return model.loglik(y, np.asarray(f, dtype=float), obs)


def dloglik_df(model: ObsModel, y: Response, f: FloatArray,
               obs: Mapping[str, float]) -> FloatArray:
    return model.dloglik_df(y, np.asarray(f, dtype=float), obs)


def sample_predictive(model: ObsModel, f: FloatArray,
                      obs: Mapping[str, float], rng: np.random.Generator,
                      trials: Optional[IntArray] = None) -> FloatArray:
    return model.sample(np.asarray(f, dtype=float), obs, rng, trials)
