"""
Eigenpairs of the 1-D Dirichlet Laplacian on [-L, L] and the spectral
density of the unit-magnitude exponentiated quadratic kernel.

A stationary kernel is approximated as

    k(x, x') ~= sum_b S(sqrt(lambda_b)) phi_b(x) phi_b(x').
"""

from typing import Union

import numpy as np

from .floatarray import FloatArray

ArrayOrFloat = Union[FloatArray, float]


def laplacian_sqrt_eigenvalue(b: Union[FloatArray, int],
                              L: float) -> ArrayOrFloat:
    ret: ArrayOrFloat = np.pi * np.asarray(b, dtype=float) / (2.0 * L)
    return ret


def laplacian_eigenvalue(b: Union[FloatArray, int], L: float) -> ArrayOrFloat:
    ret: ArrayOrFloat = np.square(laplacian_sqrt_eigenvalue(b, L))
    return ret


def laplacian_eigenfunction(b: Union[FloatArray, int], L: float,
                            x: ArrayOrFloat) -> ArrayOrFloat:
    """
    (1/sqrt(L)) sin(pi b (x + L) / (2L)).

    Points outside [-L, L] get the analytic sine extension.
    """

    omega = laplacian_sqrt_eigenvalue(b, L)
    ret: ArrayOrFloat = np.sin(omega * (np.asarray(x) + L)) / np.sqrt(L)
    return ret


def spectral_density_eq(omega: ArrayOrFloat, ell: float) -> ArrayOrFloat:
    ret: ArrayOrFloat = ell * np.sqrt(2.0 * np.pi) \
        * np.exp(-0.5 * np.square(ell * np.asarray(omega)))
    return ret


def eigenfunction_matrix(x: FloatArray, num_basis: int,
                         L: float) -> FloatArray:
    """N x B matrix with [n, b-1] = phi_b(x_n)."""

    b = np.arange(1, num_basis + 1, dtype=float)
    omega = np.pi * b / (2.0 * L)
    ret: FloatArray = np.sin(np.outer(np.asarray(x) + L, omega)) / np.sqrt(L)
    return ret
