import numpy as np
import pytest
import scipy.linalg

from mdgp.categoricaleigen import decompose_categorical, helmert_basis
from mdgp.featuremap import BasisConfig, approx_kernel_matrix, \
    build_feature_map
from mdgp.formula import CSOptions, parse_formula
from mdgp.floatarray import FloatArray
from mdgp.hyperparams import HyperParams
from mdgp.kernelexpr import KernelExpr, kernel_matrix
from mdgp.kernels import BIN, CS, ZS, CategoricalKernel, CustomCat, \
    categorical_matrix
from mdgp.usererror import NotPSDError

from tests.helpers import make_space

TOLERANCE = 1e-10


def random_psd(c: int, rng: np.random.Generator) -> FloatArray:
    rank = int(rng.integers(1, c + 1))
    factor = rng.normal(size=(c, rank))
    ret: FloatArray = factor @ factor.T
    return ret


def assert_reconstructs(base: CategoricalKernel) -> None:
    eigen = decompose_categorical(base)
    np.testing.assert_allclose(eigen.reconstruct(), categorical_matrix(base),
                               rtol=0, atol=TOLERANCE)
    np.testing.assert_allclose(eigen.theta.T @ eigen.theta,
                               np.eye(eigen.num_categories), atol=1e-12)


def test_helmert_is_orthonormal() -> None:
    for c in range(2, 21):
        h = helmert_basis(c)
        np.testing.assert_allclose(h.T @ h, np.eye(c), atol=1e-12)
        np.testing.assert_allclose(h[:, 1:].sum(axis=0), 0.0, atol=1e-12)


def test_reconstruction() -> None:
    rng = np.random.default_rng(1)
    for c in range(2, 21):
        assert_reconstructs(ZS("z", c))
        for _ in range(20):
            variance = float(rng.uniform(0.2, 3.0))
            rho = float(rng.uniform(-variance / (c - 1), variance))
            assert_reconstructs(CS("z", c, variance, rho))
        masked = rng.choice(c, size=int(rng.integers(0, c)), replace=False)
        assert_reconstructs(BIN("z", c, frozenset(int(m) for m in masked)))
        assert_reconstructs(CustomCat("z", random_psd(c, rng)))


def test_compound_symmetry_closed_form_matches_solver() -> None:
    rng = np.random.default_rng(2)
    for c in range(2, 21):
        variance = float(rng.uniform(0.2, 3.0))
        rho = float(rng.uniform(-variance / (c - 1), variance))
        base = CS("z", c, variance, rho)
        eigen = decompose_categorical(base)
        assert eigen.d[0] == pytest.approx(variance + (c - 1) * rho)
        np.testing.assert_allclose(eigen.d[1:], variance - rho)
        numeric = scipy.linalg.eigvalsh(categorical_matrix(base))
        np.testing.assert_allclose(np.sort(eigen.d), numeric, rtol=0,
                                   atol=TOLERANCE)


def test_zero_sum_drops_constant_direction() -> None:
    eigen = decompose_categorical(ZS("z", 3))
    np.testing.assert_allclose(eigen.d, [0.0, 1.5, 1.5], atol=1e-12)
    assert eigen.effective_rank == 2
    assert eigen.retained == (1, 2)
    for c in range(2, 21):
        assert decompose_categorical(ZS("z", c)).effective_rank == c - 1


def test_identity_compound_symmetry() -> None:
    eigen = decompose_categorical(CS("z", 5, 1.0, 0.0))
    np.testing.assert_allclose(eigen.d, np.ones(5))
    assert eigen.effective_rank == 5


def test_binary_mask_rank_one() -> None:
    eigen = decompose_categorical(BIN("z", 3, frozenset({2})))
    np.testing.assert_allclose(eigen.d, [2.0, 0.0, 0.0], atol=1e-12)
    assert eigen.effective_rank == 1


def test_not_psd() -> None:
    with pytest.raises(NotPSDError):
        decompose_categorical(CustomCat("z", np.array([[1.0, 2.0],
                                                       [2.0, 1.0]])))


def test_pure_categorical_expansion_is_exact() -> None:
    rng = np.random.default_rng(3)
    matrix = random_psd(4, rng)
    space = make_space(4, ())
    x = np.repeat(np.arange(4.0), 3)[:, None]
    options = {"z": CSOptions(variance=1.3, rho=0.4)}
    for text in ("y ~ zs(z)", "y ~ cs(z)", "y ~ bin(z: 2)"):
        expr = parse_formula(text, space, options)
        check_exact(expr, x)
    check_exact(parse_formula("y ~ cat(z)", space, {"z": matrix}), x)


def check_exact(expr: KernelExpr, x: FloatArray) -> None:
    theta = HyperParams.make(alpha=[1.7], ell=[[]])
    fm = build_feature_map(x, expr, BasisConfig())
    np.testing.assert_allclose(approx_kernel_matrix(fm, theta),
                               kernel_matrix(expr, theta, x, x),
                               rtol=0, atol=TOLERANCE)
