
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from .floatarray import FloatArray
from .kernels import BIN, CS, ZS, CategoricalKernel, CustomCat, \
    categorical_matrix
from .usererror import NotPSDError

RANK_TOLERANCE = 1e-10
PSD_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class CategoricalEigen:
    """
    Orthogonal eigendecomposition C = Theta diag(d) Theta^T.

    Columns of `theta` are eigenvectors; `retained` lists the columns whose
    eigenvalue exceeds the rank tolerance and enter the feature expansion.
    """

    theta: FloatArray
    d: FloatArray
    retained: Tuple[int, ...]

    @property
    def effective_rank(self) -> int:
        return len(self.retained)

    @property
    def num_categories(self) -> int:
        return int(self.d.size)

    def reconstruct(self) -> FloatArray:
        ret: FloatArray = (self.theta * self.d) @ self.theta.T
        return ret


def helmert_basis(num_categories: int) -> FloatArray:
    """
    Normalized ones vector followed by the normalized Helmert contrasts in
    increasing contrast order.
    """

    c = num_categories
    ret = np.zeros((c, c))
    ret[:, 0] = 1.0 / np.sqrt(c)
    for k in range(1, c):
        column = np.zeros(c)
        column[:k] = -1.0
        column[k] = float(k)
        ret[:, k] = column / np.sqrt(k + k * k)
    return ret


def retained_columns(d: FloatArray) -> Tuple[int, ...]:
    scale = float(np.max(np.abs(d))) if d.size else 0.0
    if scale == 0.0:
        return ()
    return tuple(int(i) for i in np.flatnonzero(d > RANK_TOLERANCE * scale))


def decompose_compound_symmetry(num_categories: int, variance: float,
                                rho: float) -> CategoricalEigen:
    c = num_categories
    d = np.full(c, variance - rho)
    d[0] = variance + (c - 1) * rho
    d = np.where(np.abs(d) < PSD_TOLERANCE * max(1.0, abs(variance)), 0.0, d)
    return CategoricalEigen(helmert_basis(c), d, retained_columns(d))


def decompose_numeric(base: CategoricalKernel) -> CategoricalEigen:
    matrix = categorical_matrix(base)
    symmetric = 0.5 * (matrix + matrix.T)
    values, vectors = scipy.linalg.eigh(symmetric)

    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    scale = float(np.max(np.abs(values)))
    if values.size and values[-1] < -PSD_TOLERANCE * scale:
        raise NotPSDError("Kernel matrix for %r is not positive"
                          " semidefinite (eigenvalue %r).",
                          base.dim, float(values[-1]))

    # Fix signs so that the largest-magnitude entry of every column is
    # positive.
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors = vectors * signs

    values = np.where(values < 0, 0.0, values)
    return CategoricalEigen(vectors, values, retained_columns(values))


def decompose_categorical(base: CategoricalKernel) -> CategoricalEigen:
    if isinstance(base, ZS):
        c = base.num_categories
        return decompose_compound_symmetry(c, 1.0, -1.0 / (c - 1))
    elif isinstance(base, CS):
        return decompose_compound_symmetry(base.num_categories,
                                           base.variance, base.rho)
    elif isinstance(base, (BIN, CustomCat)):
        return decompose_numeric(base)
    else:
        raise NotPSDError("Kernel %r is not categorical.", base)
