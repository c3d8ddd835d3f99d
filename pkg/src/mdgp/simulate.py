"""
Synthetic longitudinal data with a shared age effect and a zero-sum group
effect, drawn from the exact additive GP prior (or, for large timing data
sets, from a fine reduced-rank version of it).
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.special import expit

from .covariates import Categorical, Continuous, CovariateSpace
from .dataset import Dataset
from .featuremap import BasisConfig, FeatureMap, build_basis
from .floatarray import FloatArray, IntArray
from .formula import parse_formula
from .hyperparams import HyperParams
from .kernelexpr import kernel_matrix
from .logger import logger
from .obsmodels import BetaBinomial, Counts
from .usererror import DataError

FORMULA = "y ~ gp(age) + zs(z) * gp(age)"
BETA_BINOMIAL_FORMULA = "successes ~ gp(age) + zs(z) * gp(age)"
AGE_RANGE = (0.0, 10.0)
NUM_GROUPS = 3
TRUE_THETA = HyperParams.make(alpha=[1.0, 1.0], ell=[[2.0], [1.0]])
NOISE_SD = 0.5
OFFSET = 100.0
SCALE = 10.0
# Reduced-rank prior for large timing data sets; with L = 2 * half-range the
# kernel error at ell = 1 stays below 1e-5 on AGE_RANGE.
PRIOR_BASIS = BasisConfig(num_basis=48, domain_scale=2.0)


@dataclass(frozen=True, eq=False)
class SimulatedData:
    formula: str
    likelihood: str
    train: Dataset
    test: Dataset
    train_ids: IntArray
    test_ids: IntArray
    f_train: FloatArray
    f_test: FloatArray

    def truth_columns(self) -> Dict[str, object]:
        f = np.concatenate([self.f_train, self.f_test])
        columns: Dict[str, object] = {
            "split": ["train"] * self.f_train.size
            + ["test"] * self.f_test.size,
            "id": np.concatenate([self.train_ids, self.test_ids]),
            "f": f,
        }
        if self.likelihood == "gaussian":
            columns["signal"] = OFFSET + SCALE * f
        return columns


def group_space() -> CovariateSpace:
    labels = tuple(str(g) for g in range(1, NUM_GROUPS + 1))
    return CovariateSpace((Continuous("age", *AGE_RANGE),
                           Categorical("z", labels)))


def draw_prior(space: CovariateSpace, formula: str, x: FloatArray,
               rng: np.random.Generator) -> FloatArray:
    """One draw of f ~ N(0, K) over all points, K from the exact kernel."""

    expr = parse_formula(formula, space)
    k = kernel_matrix(expr, TRUE_THETA, x, x)
    # K is numerically singular (smooth EQ, zero-sum rows), so sample
    # through the eigendecomposition rather than a Cholesky factor.
    w, v = np.linalg.eigh(0.5 * (k + k.T))
    ret: FloatArray = v @ (np.sqrt(np.clip(w, 0.0, None))
                           * rng.standard_normal(w.size))
    return ret


def prior_features(space: CovariateSpace, formula: str,
                   x: FloatArray) -> FeatureMap:
    """
    Feature map of `x` over a domain fixed by AGE_RANGE, so that the
    expansion does not depend on the sampled ages.
    """

    expr = parse_formula(formula, space)
    span = np.array([[AGE_RANGE[0], 0.0], [AGE_RANGE[1], 0.0]])
    basis = build_basis(np.vstack([x, span]), expr, PRIOR_BASIS)
    return basis.feature_map(x)


def draw_prior_lowrank(space: CovariateSpace, formula: str, x: FloatArray,
                       rng: np.random.Generator) -> FloatArray:
    """One draw of f from the reduced-rank prior, in O(N M) time and memory."""

    fm = prior_features(space, formula, x)
    return fm.latent(TRUE_THETA, rng.standard_normal(fm.num_columns))


def individuals(ids: FloatArray, per_id: int,
                rng: np.random.Generator) -> FloatArray:
    """Rows (age, group code) for `per_id` observations of each id."""

    id_column = np.repeat(ids, per_id)
    age = rng.uniform(*AGE_RANGE, size=id_column.size)
    group = (id_column - 1) % NUM_GROUPS
    return np.column_stack([age, group])


def simulate_experiment1(n_train: int = 60, n_test: int = 150,
                         seed: int = 0) -> SimulatedData:
    """
    Nine individuals in three groups (id 1, 4, 7 in group 1 and so on);
    individuals 1-6 form the training set and 7-9 the test set, all with
    ages uniform on [0, 10]. y = 100 + 10 (f + e), e ~ N(0, 0.5^2).
    """

    if n_train < 6 or n_train % 6:
        raise DataError("n_train must be a positive multiple of 6, got %s.",
                        n_train)
    if n_test < 3 or n_test % 3:
        raise DataError("n_test must be a positive multiple of 3, got %s.",
                        n_test)
    rng = np.random.default_rng(seed)
    space = group_space()
    train_ids = np.repeat(np.arange(1, 7), n_train // 6)
    test_ids = np.repeat(np.arange(7, 10), n_test // 3)
    x_train = individuals(np.arange(1, 7), n_train // 6, rng)
    x_test = individuals(np.arange(7, 10), n_test // 3, rng)

    f = draw_prior(space, FORMULA, np.vstack([x_train, x_test]), rng)
    y = OFFSET + SCALE * (f + rng.normal(0.0, NOISE_SD, size=f.size))
    logger.debug("Simulated %s training and %s test points (seed %s).",
                 n_train, n_test, seed)
    return SimulatedData(FORMULA, "gaussian",
                         Dataset(space, x_train, y[:n_train]),
                         Dataset(space, x_test, y[n_train:]),
                         train_ids, test_ids, f[:n_train], f[n_train:])


def simulate_beta_binomial(n_per_group: int = 30, seed: int = 0,
                           trials: int = 20, n_test_per_group: int = 10,
                           gamma: float = 0.05, w0: float = 0.0,
                           rng: Optional[np.random.Generator] = None) \
        -> SimulatedData:
    """
    Three groups with the same additive latent structure, success
    probability inv-logit(f + w0) and beta-binomial counts.
    """

    if n_per_group < 1 or n_test_per_group < 1 or trials < 1:
        raise DataError("Group sizes and trials must be positive.")
    rng = rng or np.random.default_rng(seed)
    space = group_space()
    groups = np.arange(1, NUM_GROUPS + 1)
    x_train = individuals(groups, n_per_group, rng)
    x_test = individuals(groups, n_test_per_group, rng)
    n_train = x_train.shape[0]

    f = draw_prior(space, BETA_BINOMIAL_FORMULA,
                   np.vstack([x_train, x_test]), rng)
    n = np.full(f.size, trials, dtype=np.int64)
    k = BetaBinomial().sample(f, {"gamma": gamma, "w0": w0}, rng, n)
    counts = Counts(k.astype(np.int64), n)
    logger.debug("Simulated beta-binomial data, mean success rate %.3f.",
                 float(np.mean(expit(f + w0))))
    return SimulatedData(BETA_BINOMIAL_FORMULA, "beta_binomial",
                         Dataset(space, x_train, counts.subset(
                             slice(0, n_train)), n[:n_train]),
                         Dataset(space, x_test, counts.subset(
                             slice(n_train, None)), n[n_train:]),
                         np.repeat(groups, n_per_group),
                         np.repeat(groups, n_test_per_group),
                         f[:n_train], f[n_train:])


def simulate_grouped(n: int, seed: int = 0) -> Dataset:
    """
    `n` points with uniform ages and groups and the Gaussian response of
    `simulate_experiment1`, for any `n`; used for timing runs. The latent
    function comes from the reduced-rank prior so that large `n` stays
    linear in cost.
    """

    if n < 2:
        raise DataError("Need at least 2 points, got %s.", n)
    rng = np.random.default_rng(seed)
    space = group_space()
    x = np.column_stack([rng.uniform(*AGE_RANGE, size=n),
                         rng.integers(0, NUM_GROUPS, size=n)])
    f = draw_prior_lowrank(space, FORMULA, x, rng)
    y = OFFSET + SCALE * (f + rng.normal(0.0, NOISE_SD, size=n))
    return Dataset(space, x, y)
