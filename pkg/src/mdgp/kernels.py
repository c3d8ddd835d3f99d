
from dataclasses import dataclass, field
from typing import FrozenSet, Union

import numpy as np

from .floatarray import FloatArray
from .usererror import KernelSpecError


SYMMETRY_TOLERANCE = 1e-10


def check_num_categories(dim: str, num_categories: int) -> None:
    if num_categories < 2:
        raise KernelSpecError("Categorical kernel on %r needs at least 2"
                              " categories, got %s.", dim, num_categories)


@dataclass(frozen=True)
class EQ:
    """Unit-magnitude exponentiated quadratic factor on a continuous dim."""

    dim: str

    @property
    def keyword(self) -> str:
        return "gp"

    def evaluate(self, x1: FloatArray, x2: FloatArray,
                 lengthscale: float) -> FloatArray:
        r = np.subtract.outer(x1, x2)
        ret: FloatArray = np.exp(-0.5 * np.square(r / lengthscale))
        return ret


@dataclass(frozen=True)
class ZS:
    dim: str
    num_categories: int

    def __post_init__(self) -> None:
        check_num_categories(self.dim, self.num_categories)

    @property
    def keyword(self) -> str:
        return "zs"


@dataclass(frozen=True)
class CS:
    dim: str
    num_categories: int
    variance: float = 1.0
    rho: float = 0.0

    def __post_init__(self) -> None:
        check_num_categories(self.dim, self.num_categories)
        if self.variance < 0:
            raise KernelSpecError("CS kernel on %r needs variance >= 0,"
                                  " got %r.", self.dim, self.variance)

        lower = -self.variance / (self.num_categories - 1)
        slack = SYMMETRY_TOLERANCE * max(1.0, self.variance)
        if not (lower - slack <= self.rho <= self.variance + slack):
            raise KernelSpecError(
                "CS kernel on %r needs %r <= rho <= %r, got %r.",
                self.dim, lower, self.variance, self.rho)

    @property
    def keyword(self) -> str:
        return "cs"


@dataclass(frozen=True)
class BIN:
    dim: str
    num_categories: int
    masked: FrozenSet[int]

    def __post_init__(self) -> None:
        check_num_categories(self.dim, self.num_categories)
        for code in self.masked:
            if not 0 <= code < self.num_categories:
                raise KernelSpecError("Masked category %r out of range for %r.",
                                      code, self.dim)
        if len(self.masked) >= self.num_categories:
            raise KernelSpecError("Binary mask on %r masks every category.",
                                  self.dim)

    @property
    def keyword(self) -> str:
        return "bin"


@dataclass(frozen=True, eq=False)
class CustomCat:
    dim: str
    matrix: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise KernelSpecError("Custom kernel matrix for %r must be square,"
                                  " got shape %r.", self.dim, matrix.shape)
        if matrix.shape[0] < 2:
            raise KernelSpecError("Custom kernel matrix for %r needs at least"
                                  " 2 categories.", self.dim)
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOLERANCE * scale:
            raise KernelSpecError("Custom kernel matrix for %r is not"
                                  " symmetric.", self.dim)
        object.__setattr__(self, "matrix", matrix)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CustomCat):
            return NotImplemented
        return self.dim == other.dim \
            and bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self) -> int:
        return hash((self.dim, self.matrix.tobytes()))

    @property
    def num_categories(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def keyword(self) -> str:
        return "cat"


CategoricalKernel = Union[ZS, CS, BIN, CustomCat]
BaseKernel = Union[EQ, ZS, CS, BIN, CustomCat]


def categorical_matrix(base: CategoricalKernel) -> FloatArray:
    """The C x C matrix with entry [v, w] = l(v, w)."""

    if isinstance(base, ZS):
        c = base.num_categories
        off = -1.0 / (c - 1)
        ret: FloatArray = np.full((c, c), off)
        np.fill_diagonal(ret, 1.0)
        return ret
    elif isinstance(base, CS):
        c = base.num_categories
        ret = np.full((c, c), float(base.rho))
        np.fill_diagonal(ret, float(base.variance))
        return ret
    elif isinstance(base, BIN):
        indicator = np.ones(base.num_categories)
        indicator[sorted(base.masked)] = 0.0
        return np.outer(indicator, indicator)
    elif isinstance(base, CustomCat):
        return np.array(base.matrix, dtype=float)
    else:
        raise KernelSpecError("Kernel %r is not categorical.", base)


def evaluate_categorical(base: CategoricalKernel,
                         z1: FloatArray, z2: FloatArray) -> FloatArray:
    matrix = categorical_matrix(base)
    i1 = np.asarray(z1).astype(np.int64)
    i2 = np.asarray(z2).astype(np.int64)
    ret: FloatArray = matrix[np.ix_(i1, i2)]
    return ret
