"""
Convergence diagnostics on chains x iterations arrays: rank-normalized
split R-hat, bulk effective sample size and the Monte Carlo standard error
of the mean.
"""

from dataclasses import dataclass
import math
from typing import Dict, Tuple

import numpy as np
from scipy import fft, stats

from .draws import PosteriorDraws
from .floatarray import FloatArray
from .logger import logger
from .usererror import InsufficientDrawsError

MIN_CHAINS = 2
MIN_ITERATIONS = 100
RHAT_WARNING = 1.05


def check_size(ary: FloatArray) -> None:
    num_chains, num_iterations = np.shape(ary)
    if num_chains < MIN_CHAINS or num_iterations < MIN_ITERATIONS:
        raise InsufficientDrawsError(
            "Diagnostics need at least %s chains of %s iterations,"
            " got %s of %s.", MIN_CHAINS, MIN_ITERATIONS,
            num_chains, num_iterations)


def is_degenerate(ary: FloatArray) -> bool:
    return bool(np.any(~np.isfinite(ary))) or bool(np.ptp(ary) == 0)


def split_chains(ary: FloatArray) -> FloatArray:
    half = ary.shape[1] // 2
    ret: FloatArray = np.vstack((ary[:, :half], ary[:, -half:]))
    return ret


def z_scale(ary: FloatArray) -> FloatArray:
    rank = stats.rankdata(ary, method="average").reshape(ary.shape)
    ret: FloatArray = stats.norm.ppf((rank - 0.5) / ary.size)
    return ret


def autocovariance(x: FloatArray) -> FloatArray:
    n = x.size
    m = fft.next_fast_len(2 * n)
    centered = x - np.mean(x)
    spectrum = fft.rfft(centered, n=m)
    ret: FloatArray = fft.irfft(spectrum * np.conjugate(spectrum), n=m)[:n] / n
    return ret


def basic_rhat(ary: FloatArray) -> float:
    num_iterations = ary.shape[1]
    chain_mean = np.mean(ary, axis=1)
    within = float(np.mean(np.var(ary, axis=1, ddof=1)))
    between = num_iterations * float(np.var(chain_mean, ddof=1))
    if within == 0:
        return math.nan
    return math.sqrt((between / within + num_iterations - 1)
                     / num_iterations)


def split_rhat(ary: FloatArray) -> float:
    """
    Maximum of the rank-normalized split R-hat of the draws and of their
    distance to the median. NaN for constant or non-finite draws.
    """

    ary = np.asarray(ary, dtype=float)
    check_size(ary)
    if is_degenerate(ary):
        return math.nan
    bulk = basic_rhat(z_scale(split_chains(ary)))
    folded = np.abs(ary - np.median(ary))
    if is_degenerate(folded):
        return bulk
    tail = basic_rhat(z_scale(split_chains(folded)))
    return max(bulk, tail)


def ess(ary: FloatArray) -> float:
    """Effective sample size with Geyer's initial monotone sequence."""

    num_chains, num_iterations = ary.shape
    acov = np.asarray([autocovariance(row) for row in ary])
    chain_mean = np.mean(ary, axis=1)
    mean_var = float(np.mean(acov[:, 0])) * num_iterations \
        / (num_iterations - 1.0)
    var_plus = mean_var * (num_iterations - 1.0) / num_iterations
    if num_chains > 1:
        var_plus += float(np.var(chain_mean, ddof=1))
    if var_plus == 0:
        return math.nan

    rho = np.zeros(num_iterations)
    rho_even = 1.0
    rho[0] = rho_even
    rho_odd = 1.0 - (mean_var - float(np.mean(acov[:, 1]))) / var_plus
    rho[1] = rho_odd

    t = 1
    while t < num_iterations - 4 and rho_even + rho_odd > 0.0:
        rho_even = 1.0 - (mean_var - float(np.mean(acov[:, t + 1]))) \
            / var_plus
        rho_odd = 1.0 - (mean_var - float(np.mean(acov[:, t + 2]))) / var_plus
        if rho_even + rho_odd >= 0:
            rho[t + 1] = rho_even
            rho[t + 2] = rho_odd
        t += 2

    max_t = t
    if rho_even > 0:
        rho[max_t + 1] = rho_even

    # Initial monotone sequence.
    t = 1
    while t <= max_t - 3:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = 0.5 * (rho[t - 1] + rho[t])
            rho[t + 2] = rho[t + 1]
        t += 2

    tau = -1.0 + 2.0 * float(np.sum(rho[:max_t])) + float(rho[max_t + 1])
    # Antithetic chains can push tau below the usual floor.
    tau = max(tau, 1.0 / math.log10(num_chains * num_iterations))
    return num_chains * num_iterations / tau


def bulk_ess(ary: FloatArray) -> float:
    ary = np.asarray(ary, dtype=float)
    check_size(ary)
    if is_degenerate(ary):
        return math.nan
    return ess(z_scale(split_chains(ary)))


def mcse_mean(ary: FloatArray) -> float:
    ary = np.asarray(ary, dtype=float)
    check_size(ary)
    if is_degenerate(ary):
        return math.nan
    sd = float(np.std(ary, ddof=1))
    return sd / math.sqrt(ess(split_chains(ary)))


@dataclass(frozen=True)
class Diagnostics:
    names: Tuple[str, ...]
    rhat: Tuple[float, ...]
    ess_bulk: Tuple[float, ...]
    mcse_mean: Tuple[float, ...]
    divergences: Tuple[int, ...]
    step_size: Tuple[float, ...]
    mean_tree_depth: Tuple[float, ...]

    @property
    def max_rhat(self) -> float:
        finite = [r for r in self.rhat if not math.isnan(r)]
        return max(finite) if finite else math.nan

    def suspect(self, threshold: float = RHAT_WARNING) -> Tuple[str, ...]:
        return tuple(n for n, r in zip(self.names, self.rhat)
                     if not math.isnan(r) and r > threshold)

    def to_json(self) -> Dict[str, object]:
        def clean(value: float) -> object:
            return None if math.isnan(value) else value

        return {
            "parameters": {
                name: {"rhat": clean(r), "ess_bulk": clean(e),
                       "mcse_mean": clean(m)}
                for name, r, e, m in zip(self.names, self.rhat,
                                         self.ess_bulk, self.mcse_mean)},
            "divergences": list(self.divergences),
            "step_size": list(self.step_size),
            "mean_tree_depth": list(self.mean_tree_depth),
            "max_rhat": clean(self.max_rhat),
        }


def compute_diagnostics(draws: PosteriorDraws) -> Diagnostics:
    check_size(draws.values[:, :, 0] if draws.names
               else np.zeros((draws.num_chains, draws.num_iterations)))
    rhat = []
    bulk = []
    mcse = []
    for name in draws.names:
        ary = draws.chains(name)
        rhat.append(split_rhat(ary))
        bulk.append(bulk_ess(ary))
        mcse.append(mcse_mean(ary))

    def chain_means(stat: str) -> Tuple[float, ...]:
        if stat not in draws.stats:
            return tuple(math.nan for _ in range(draws.num_chains))
        return tuple(float(np.mean(row)) for row in draws.stats[stat])

    ret = Diagnostics(draws.names, tuple(rhat), tuple(bulk), tuple(mcse),
                      draws.divergences, chain_means("step_size"),
                      chain_means("tree_depth"))
    suspect = ret.suspect()
    if suspect:
        logger.warning("R-hat above %s for %s parameters (max %.3f),"
                       " first: %s.", RHAT_WARNING, len(suspect),
                       ret.max_rhat, suspect[0])
    return ret
