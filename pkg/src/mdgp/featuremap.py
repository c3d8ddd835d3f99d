"""
Low-rank feature expansion of sum-of-products kernels.

Each term j contributes the Cartesian product of B Laplacian eigenfunctions
per continuous factor and of the retained eigenvectors per categorical
factor. The feature matrix factors as Psi = Psi_dagger diag(sqrt(delta)),
where Psi_dagger depends only on the inputs and delta only on the kernel
parameters, so Psi_dagger is computed once per set of points.
"""

from dataclasses import dataclass
import itertools
from typing import Any, Dict, List, Optional, Sequence, Tuple, cast

import numpy as np

from .categoricaleigen import CategoricalEigen, decompose_categorical
from .covariates import CovariateSpace
from .floatarray import FloatArray, IntArray
from .hyperparams import HyperParams
from .kernelexpr import KernelExpr, check_points
from .laplacian import eigenfunction_matrix, spectral_density_eq
from .logger import logger
from .usererror import BasisTooLargeError, DataError, KernelSpecError


@dataclass(frozen=True)
class BasisConfig:
    num_basis: int = 16
    domain_scale: float = 1.5
    max_basis_total: int = 5000

    def __post_init__(self) -> None:
        if self.num_basis < 1:
            raise KernelSpecError("Number of basis functions B must be"
                                  " at least 1, got %r.", self.num_basis)
        if not self.domain_scale > 1:
            raise KernelSpecError("Domain scaling factor c must be greater"
                                  " than 1, got %r.", self.domain_scale)
        if self.max_basis_total < 1:
            raise KernelSpecError("max_basis_total must be positive.")


@dataclass(frozen=True)
class ContinuousFactor:
    dim: str
    dim_index: int
    num_basis: int
    L: float
    center: float

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise KernelSpecError("Domain half-width L for %r must be"
                                  " positive, got %r.", self.dim, self.L)

    def shifted(self, x: FloatArray) -> FloatArray:
        ret: FloatArray = x[:, self.dim_index] - self.center
        return ret


@dataclass(frozen=True, eq=False)
class CategoricalFactor:
    dim: str
    dim_index: int
    eigen: CategoricalEigen

    def lookup(self, x: FloatArray) -> FloatArray:
        """N x C matrix of Theta rows for the category codes in `x`."""

        codes = x[:, self.dim_index].astype(np.int64)
        if np.any(codes < 0) or np.any(codes >= self.eigen.num_categories):
            raise DataError("Category codes for %r out of range.", self.dim)
        ret: FloatArray = self.eigen.theta[codes, :]
        return ret


@dataclass(frozen=True, eq=False)
class TermBasis:
    continuous: Tuple[ContinuousFactor, ...]
    categorical: Tuple[CategoricalFactor, ...]
    basis_index: IntArray
    eigen_index: IntArray
    omega: FloatArray
    eigen_product: FloatArray

    @property
    def num_columns(self) -> int:
        return int(self.eigen_product.size)

    @property
    def num_columns_full(self) -> int:
        ret = 1
        for c in self.continuous:
            ret *= c.num_basis
        for f in self.categorical:
            ret *= f.eigen.num_categories
        return ret

    @staticmethod
    def make(continuous: Sequence[ContinuousFactor],
             categorical: Sequence[CategoricalFactor]) -> 'TermBasis':
        ranges: List[Sequence[int]] = \
            [range(1, c.num_basis + 1) for c in continuous]
        ranges.extend(f.eigen.retained for f in categorical)
        combos = list(itertools.product(*ranges))
        q = len(continuous)
        table = np.asarray(combos, dtype=np.int64).reshape(len(combos),
                                                           len(ranges))
        basis_index = table[:, :q]
        eigen_index = table[:, q:]

        omega = np.zeros(basis_index.shape)
        for i, c in enumerate(continuous):
            omega[:, i] = np.pi * basis_index[:, i] / (2.0 * c.L)

        eigen_product = np.ones(len(combos))
        for i, f in enumerate(categorical):
            eigen_product *= f.eigen.d[eigen_index[:, i]]

        return TermBasis(tuple(continuous), tuple(categorical),
                         basis_index, eigen_index, omega, eigen_product)

    def evaluate(self, x: FloatArray) -> FloatArray:
        ret: FloatArray = np.ones((x.shape[0], self.num_columns))
        for i, c in enumerate(self.continuous):
            phi = eigenfunction_matrix(c.shifted(x), c.num_basis, c.L)
            ret *= phi[:, self.basis_index[:, i] - 1]
        for i, f in enumerate(self.categorical):
            ret *= f.lookup(x)[:, self.eigen_index[:, i]]
        return ret

    def delta(self, alpha: float, ell: FloatArray) -> FloatArray:
        ret: FloatArray = alpha ** 2 * self.eigen_product.copy()
        for i in range(len(self.continuous)):
            ret *= spectral_density_eq(self.omega[:, i], float(ell[i]))
        return ret

    def labels(self, j: int) -> List[str]:
        ret = []
        for row_b, row_c in zip(self.basis_index, self.eigen_index):
            bs = ",".join(str(b) for b in row_b)
            cs = ",".join(str(c + 1) for c in row_c)
            ret.append(f"{j}:{bs}|{cs}")
        return ret


@dataclass(frozen=True, eq=False)
class FeatureBasis:
    """Parameter-free description of the expansion for a kernel."""

    expr: KernelExpr
    terms: Tuple[TermBasis, ...]

    @property
    def num_columns(self) -> int:
        return sum(t.num_columns for t in self.terms)

    @property
    def num_columns_full(self) -> int:
        return sum(t.num_columns_full for t in self.terms)

    @property
    def component_slices(self) -> Tuple[slice, ...]:
        ret = []
        start = 0
        for t in self.terms:
            ret.append(slice(start, start + t.num_columns))
            start += t.num_columns
        return tuple(ret)

    @property
    def column_index(self) -> List[Tuple[int, Tuple[int, ...]]]:
        """Column m -> (term j, multi-index (b_1.., c_1..)); 0-based j."""

        ret = []
        for j, t in enumerate(self.terms):
            for row_b, row_c in zip(t.basis_index, t.eigen_index):
                ret.append((j, tuple(int(b) for b in row_b)
                            + tuple(int(c) for c in row_c)))
        return ret

    def column_labels(self) -> List[str]:
        ret = []
        for j, t in enumerate(self.terms, start=1):
            ret.extend(t.labels(j))
        return ret

    def evaluate(self, x: FloatArray) -> FloatArray:
        x = check_points(self.expr.space, x)
        parts = [t.evaluate(x) for t in self.terms]
        ret: FloatArray = np.hstack(parts) if parts \
            else np.zeros((x.shape[0], 0))
        return ret

    def delta(self, theta: HyperParams) -> FloatArray:
        parts = [t.delta(float(theta.alpha[j]), theta.ell[j])
                 for j, t in enumerate(self.terms)]
        ret: FloatArray = np.concatenate(parts)
        return ret

    def sqrt_delta(self, theta: HyperParams) -> FloatArray:
        ret: FloatArray = np.sqrt(self.delta(theta))
        return ret

    def sqrt_delta_jacobian(self, theta: HyperParams) -> FloatArray:
        """
        Derivatives of sqrt(delta) with respect to the log kernel
        parameters, as a (num kernel parameters) x M matrix in packing order.
        """

        sqrt_delta = self.sqrt_delta(theta)
        rows = []
        for j, (t, sl) in enumerate(zip(self.terms, self.component_slices)):
            row = np.zeros(self.num_columns)
            row[sl] = sqrt_delta[sl]
            rows.append(row)
            for i in range(len(t.continuous)):
                ell = float(theta.ell[j][i])
                row = np.zeros(self.num_columns)
                row[sl] = 0.5 * sqrt_delta[sl] \
                    * (1.0 - np.square(ell * t.omega[:, i]))
                rows.append(row)
        ret: FloatArray = np.vstack(rows)
        return ret

    def out_of_domain(self, x: FloatArray) -> int:
        """Number of points outside [-L, L] for some continuous factor."""

        x = check_points(self.expr.space, x)
        outside = np.zeros(x.shape[0], dtype=bool)
        for t in self.terms:
            for c in t.continuous:
                outside |= np.abs(c.shifted(x)) > c.L
        return int(np.count_nonzero(outside))

    def feature_map(self, x: FloatArray) -> 'FeatureMap':
        return FeatureMap(self, self.evaluate(x))

    def to_json(self) -> Dict[str, object]:
        terms = []
        for t in self.terms:
            terms.append({
                "continuous": [{"dim": c.dim, "B": c.num_basis,
                                "L": c.L, "center": c.center}
                               for c in t.continuous],
                "categorical": [{"dim": f.dim,
                                 "theta": f.eigen.theta.tolist(),
                                 "d": f.eigen.d.tolist(),
                                 "retained": list(f.eigen.retained)}
                                for f in t.categorical],
            })
        return {"terms": terms}

    @staticmethod
    def from_json(raw: Dict[str, object], expr: KernelExpr) -> 'FeatureBasis':
        entries = cast(List[Dict[str, Any]], raw["terms"])
        space = expr.space
        terms = []
        for entry in entries:
            continuous = [ContinuousFactor(c["dim"], space.index(c["dim"]),
                                           int(c["B"]), float(c["L"]),
                                           float(c["center"]))
                          for c in entry["continuous"]]
            categorical = [
                CategoricalFactor(
                    f["dim"], space.index(f["dim"]),
                    CategoricalEigen(np.asarray(f["theta"], dtype=float),
                                     np.asarray(f["d"], dtype=float),
                                     tuple(int(i) for i in f["retained"])))
                for f in entry["categorical"]]
            terms.append(TermBasis.make(continuous, categorical))
        return FeatureBasis(expr, tuple(terms))


@dataclass(frozen=True, eq=False)
class FeatureMap:
    basis: FeatureBasis
    psi_dagger: FloatArray

    @property
    def num_points(self) -> int:
        return int(self.psi_dagger.shape[0])

    @property
    def num_columns(self) -> int:
        return int(self.psi_dagger.shape[1])

    @property
    def component_slices(self) -> Tuple[slice, ...]:
        return self.basis.component_slices

    @property
    def column_index(self) -> List[Tuple[int, Tuple[int, ...]]]:
        return self.basis.column_index

    def delta(self, theta: HyperParams) -> FloatArray:
        return self.basis.delta(theta)

    def psi(self, theta: HyperParams) -> FloatArray:
        ret: FloatArray = self.psi_dagger * self.basis.sqrt_delta(theta)
        return ret

    def latent(self, theta: HyperParams, xi: FloatArray,
               columns: Optional[slice] = None) -> FloatArray:
        return latent_values(self.psi_dagger, self.basis.sqrt_delta(theta),
                             xi, columns)


def latent_values(psi_dagger: FloatArray, sqrt_delta: FloatArray,
                  xi: FloatArray, columns: Optional[slice] = None) \
        -> FloatArray:
    """
    f = Psi_dagger (sqrt(delta) * xi), optionally over a column block.
    Inference and prediction both go through here so that training-point
    values agree bit for bit.
    """

    if columns is not None:
        psi_dagger = psi_dagger[:, columns]
        sqrt_delta = sqrt_delta[columns]
        xi = np.asarray(xi)[..., columns]
    ret: FloatArray = psi_dagger @ (sqrt_delta * np.asarray(xi)).T
    return ret


def domain_factor(space: CovariateSpace, dim: str, x: FloatArray,
                  config: BasisConfig) -> ContinuousFactor:
    d = space.index(dim)
    low = float(np.min(x[:, d]))
    high = float(np.max(x[:, d]))
    half_range = 0.5 * (high - low)
    if not half_range > 0:
        raise DataError("Covariate %r is constant; cannot size the"
                        " approximation domain.", dim)
    center = 0.5 * (high + low)
    return ContinuousFactor(dim, d, config.num_basis,
                            config.domain_scale * half_range, center)


def build_basis(x: FloatArray, expr: KernelExpr,
                config: BasisConfig) -> FeatureBasis:
    x = check_points(expr.space, x)
    eigens: Dict[object, CategoricalEigen] = {}
    terms = []
    for term in expr.terms:
        continuous = [domain_factor(expr.space, eq.dim, x, config)
                      for eq in term.continuous_factors]
        categorical = []
        for cat in term.categorical_factors:
            if cat not in eigens:
                eigens[cat] = decompose_categorical(cat)
            categorical.append(CategoricalFactor(
                cat.dim, expr.space.index(cat.dim), eigens[cat]))
        terms.append((continuous, categorical))

    total = 0
    for continuous, categorical in terms:
        count = 1
        for c in continuous:
            count *= c.num_basis
        for f in categorical:
            count *= f.eigen.effective_rank
        total += count
    if total > config.max_basis_total:
        raise BasisTooLargeError(
            "Expansion needs %s basis functions, more than the cap of %s.",
            total, config.max_basis_total)

    basis = FeatureBasis(expr, tuple(TermBasis.make(c, f)
                                     for c, f in terms))
    for j, t in enumerate(basis.terms, start=1):
        for c in t.continuous:
            logger.debug("Term %s factor %s: B=%s, L=%.4g, centre=%.4g.",
                         j, c.dim, c.num_basis, c.L, c.center)
    logger.info("Feature expansion has %s terms and M=%s columns"
                " (%s with all categorical eigenvalues).",
                expr.num_terms, basis.num_columns, basis.num_columns_full)
    return basis


def build_feature_map(x: FloatArray, expr: KernelExpr,
                      config: BasisConfig) -> FeatureMap:
    """Build the feature map of standardized training points `x`."""

    return build_basis(x, expr, config).feature_map(x)


def approx_kernel_matrix(fm: FeatureMap, theta: HyperParams) -> FloatArray:
    """Psi_dagger diag(delta) Psi_dagger^T; for diagnostics and tests."""

    ret: FloatArray = (fm.psi_dagger * fm.delta(theta)) @ fm.psi_dagger.T
    return ret
