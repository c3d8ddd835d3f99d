
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .covariates import Categorical, Continuous, CovariateSpace
from .floatarray import FloatArray
from .hyperparams import HyperParams
from .kernels import BIN, EQ, BaseKernel, CategoricalKernel, \
    evaluate_categorical
from .usererror import KernelSpecError


@dataclass(frozen=True)
class KernelTerm:
    continuous_factors: Tuple[EQ, ...]
    categorical_factors: Tuple[CategoricalKernel, ...]

    @property
    def num_continuous(self) -> int:
        return len(self.continuous_factors)

    @property
    def num_categorical(self) -> int:
        return len(self.categorical_factors)

    @property
    def dims(self) -> Tuple[str, ...]:
        return tuple(f.dim for f in self.continuous_factors) \
            + tuple(f.dim for f in self.categorical_factors)


@dataclass(frozen=True)
class KernelExpr:
    """
    Sum of products of base kernels.

    Every term carries one magnitude parameter alpha_j; its factors are
    scale-free (EQ has unit magnitude, ZS and BIN are parameter-free).
    """

    space: CovariateSpace
    terms: Tuple[KernelTerm, ...]
    response: str = "y"

    def __post_init__(self) -> None:
        if len(self.terms) < 1:
            raise KernelSpecError("A kernel needs at least one term.")

        for j, term in enumerate(self.terms, start=1):
            if term.num_continuous + term.num_categorical < 1:
                raise KernelSpecError("Term %s has no factors.", j)
            dims = term.dims
            if len(set(dims)) != len(dims):
                raise KernelSpecError("Term %s uses a covariate twice: %r.",
                                      j, dims)
            for eq in term.continuous_factors:
                if not isinstance(self.space.get(eq.dim), Continuous):
                    raise KernelSpecError(
                        "Kernel gp() needs a continuous covariate,"
                        " but %r is categorical.", eq.dim)
            for cat in term.categorical_factors:
                dim = self.space.get(cat.dim)
                if not isinstance(dim, Categorical):
                    raise KernelSpecError(
                        "Kernel %s() needs a categorical covariate,"
                        " but %r is continuous.", cat.keyword, cat.dim)
                if dim.num_categories != cat.num_categories:
                    raise KernelSpecError(
                        "Kernel %s(%s) has %s categories but the covariate"
                        " has %s.", cat.keyword, cat.dim,
                        cat.num_categories, dim.num_categories)

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @property
    def continuous_counts(self) -> Tuple[int, ...]:
        return tuple(t.num_continuous for t in self.terms)

    def parameter_names(self) -> Tuple[str, ...]:
        """Kernel parameter names, term-major and factor-minor."""

        names = []
        for j, term in enumerate(self.terms, start=1):
            names.append(f"alpha[{j}]")
            names.extend(f"ell[{j},{eq.dim}]"
                         for eq in term.continuous_factors)
        return tuple(names)


def check_points(space: CovariateSpace, x: FloatArray) -> FloatArray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != len(space.dims):
        raise KernelSpecError("Points have %s columns but the covariate"
                              " space has %s dimensions.",
                              x.shape[1], len(space.dims))
    return x


def term_matrix(expr: KernelExpr, theta: HyperParams, j: int,
                x1: FloatArray, x2: FloatArray) -> FloatArray:
    term = expr.terms[j]
    ret: FloatArray = np.full((x1.shape[0], x2.shape[0]),
                              float(theta.alpha[j]) ** 2)
    for eq, ell in zip(term.continuous_factors, theta.ell[j]):
        d = expr.space.index(eq.dim)
        ret *= eq.evaluate(x1[:, d], x2[:, d], float(ell))
    for cat in term.categorical_factors:
        d = expr.space.index(cat.dim)
        ret *= evaluate_categorical(cat, x1[:, d], x2[:, d])
    return ret


def kernel_matrix(expr: KernelExpr, theta: HyperParams,
                  x1: FloatArray, x2: FloatArray,
                  terms: Optional[Iterable[int]] = None) -> FloatArray:
    """Exact kernel (cross-)matrix, optionally over a subset of terms."""

    x1 = check_points(expr.space, x1)
    x2 = check_points(expr.space, x2)
    selected = range(expr.num_terms) if terms is None else terms
    ret: FloatArray = np.zeros((x1.shape[0], x2.shape[0]))
    for j in selected:
        ret += term_matrix(expr, theta, j, x1, x2)
    return ret


def eval_kernel(expr: KernelExpr, theta: HyperParams,
                x: Sequence[float], x_prime: Sequence[float]) -> float:
    if len(x) != len(expr.space.dims) or \
       len(x_prime) != len(expr.space.dims):
        raise KernelSpecError("Points must have %s coordinates.",
                              len(expr.space.dims))
    x1 = np.asarray(x, dtype=float)[None, :]
    x2 = np.asarray(x_prime, dtype=float)[None, :]
    return float(kernel_matrix(expr, theta, x1, x2)[0, 0])


def format_factor(expr: KernelExpr, factor: BaseKernel) -> str:
    if isinstance(factor, BIN):
        dim = expr.space.get(factor.dim)
        assert isinstance(dim, Categorical)
        labels = ",".join(dim.labels[c] for c in sorted(factor.masked))
        return f"bin({factor.dim}: {labels})"
    return f"{factor.keyword}({factor.dim})"


def format_formula(expr: KernelExpr) -> str:
    terms = []
    for term in expr.terms:
        factors: List[BaseKernel] = list(term.continuous_factors)
        factors.extend(term.categorical_factors)
        terms.append("*".join(format_factor(expr, f) for f in factors))
    return f"{expr.response} ~ " + " + ".join(terms)
