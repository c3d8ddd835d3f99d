import numpy as np
import pytest

from mdgp.floatarray import FloatArray
from mdgp.formula import CSOptions, parse_formula
from mdgp.hyperparams import HyperParams
from mdgp.kernelexpr import eval_kernel, kernel_matrix
from mdgp.kernels import BIN, CS, ZS, CustomCat, categorical_matrix, \
    evaluate_categorical
from mdgp.usererror import KernelSpecError

from tests.helpers import make_space, random_points


def test_zero_sum_two_categories() -> None:
    np.testing.assert_array_equal(categorical_matrix(ZS("z", 2)),
                                  [[1.0, -1.0], [-1.0, 1.0]])


def test_zero_sum_rows_sum_to_zero() -> None:
    for c in range(2, 10):
        matrix = categorical_matrix(ZS("z", c))
        np.testing.assert_allclose(matrix.sum(axis=1), 0.0, atol=1e-12)


def test_compound_symmetry_at_upper_bound() -> None:
    matrix = categorical_matrix(CS("z", 4, variance=2.5, rho=2.5))
    np.testing.assert_allclose(matrix, np.full((4, 4), 2.5))


def test_binary_mask() -> None:
    # Category "3" has code 2.
    matrix = categorical_matrix(BIN("z", 3, frozenset({2})))
    np.testing.assert_array_equal(matrix, [[1, 1, 0], [1, 1, 0], [0, 0, 0]])


def test_evaluate_categorical_lookup() -> None:
    got = evaluate_categorical(ZS("z", 3), np.array([0.0, 1.0]),
                               np.array([0.0, 2.0, 1.0]))
    np.testing.assert_allclose(got, [[1, -0.5, -0.5], [-0.5, -0.5, 1]])


def test_compound_symmetry_rejects_rho_out_of_range() -> None:
    with pytest.raises(KernelSpecError):
        CS("z", 3, variance=1.0, rho=-0.6)
    with pytest.raises(KernelSpecError):
        CS("z", 3, variance=1.0, rho=1.5)
    with pytest.raises(KernelSpecError):
        CS("z", 3, variance=-1.0, rho=0.0)


def test_categorical_needs_two_categories() -> None:
    with pytest.raises(KernelSpecError):
        ZS("z", 1)


def test_bin_cannot_mask_everything() -> None:
    with pytest.raises(KernelSpecError):
        BIN("z", 2, frozenset({0, 1}))
    with pytest.raises(KernelSpecError):
        BIN("z", 2, frozenset({5}))


def test_custom_matrix_checks() -> None:
    with pytest.raises(KernelSpecError):
        CustomCat("z", np.ones((2, 3)))
    with pytest.raises(KernelSpecError):
        CustomCat("z", np.array([[1.0, 0.5], [0.4, 1.0]]))
    assert CustomCat("z", np.eye(3)) == CustomCat("z", np.eye(3))
    assert CustomCat("z", np.eye(3)).num_categories == 3


def test_eval_kernel_zero_sum() -> None:
    expr = parse_formula("y ~ zs(z)", make_space(3, ()))
    theta = HyperParams.make(alpha=[1.0], ell=[[]])
    assert eval_kernel(expr, theta, [1.0], [1.0]) == pytest.approx(1.0)
    assert eval_kernel(expr, theta, [0.0], [2.0]) == pytest.approx(-0.5)


def test_eval_kernel_eq() -> None:
    expr = parse_formula("y ~ gp(age)", make_space(0))
    theta = HyperParams.make(alpha=[1.0], ell=[[1.0]])
    assert eval_kernel(expr, theta, [0.3], [0.3]) == pytest.approx(1.0)


def test_eval_kernel_product() -> None:
    expr = parse_formula("y ~ gp(age)*zs(z)", make_space(2))
    theta = HyperParams.make(alpha=[2.0], ell=[[1.0]])
    got = eval_kernel(expr, theta, [1.0, 0.0], [0.0, 1.0])
    assert got == pytest.approx(-2.42612, abs=1e-5)


def test_eval_kernel_checks_dimensions() -> None:
    expr = parse_formula("y ~ gp(age)", make_space(0))
    theta = HyperParams.make(alpha=[1.0], ell=[[1.0]])
    with pytest.raises(KernelSpecError):
        eval_kernel(expr, theta, [0.0, 1.0], [0.0])


def test_kernel_matrix_sums_terms() -> None:
    space = make_space(3)
    expr = parse_formula("y ~ gp(age) + zs(z)*gp(age)", space)
    theta = HyperParams.make(alpha=[1.0, 0.7], ell=[[0.5], [1.3]])
    x = np.array([[0.0, 0.0], [0.5, 1.0], [-0.2, 2.0]])
    total = kernel_matrix(expr, theta, x, x)
    parts = kernel_matrix(expr, theta, x, x, terms=[0]) \
        + kernel_matrix(expr, theta, x, x, terms=[1])
    np.testing.assert_allclose(total, parts)
    np.testing.assert_allclose(total, total.T)


def test_hyperparams_vector_round_trip() -> None:
    theta = HyperParams.make(alpha=[1.0, 2.0], ell=[[0.5], [1.5, 2.5]],
                             sigma=0.3)
    vector = theta.to_vector(("sigma",))
    np.testing.assert_allclose(vector, [1.0, 0.5, 2.0, 1.5, 2.5, 0.3])
    back = HyperParams.from_vector((1, 2), ("sigma",), vector)
    np.testing.assert_allclose(back.alpha, theta.alpha)
    assert back.sigma == pytest.approx(0.3)


def test_hyperparams_reject_nonpositive() -> None:
    with pytest.raises(KernelSpecError):
        HyperParams.make(alpha=[0.0], ell=[[1.0]])
    with pytest.raises(KernelSpecError):
        HyperParams.make(alpha=[1.0], ell=[[-1.0]])
    with pytest.raises(KernelSpecError):
        HyperParams.make(alpha=[1.0], ell=[[1.0]], sigma=0.0)


def assert_symmetric_psd(k: FloatArray) -> None:
    np.testing.assert_allclose(k, k.T, rtol=0.0, atol=1e-12)
    eigenvalues = np.linalg.eigvalsh(k)
    assert eigenvalues.min() >= -1e-8 * max(1.0, eigenvalues.max())


def test_kernel_matrices_symmetric_psd() -> None:
    rng = np.random.default_rng(40)
    a = rng.normal(size=(4, 4))
    cases = [
        ("y ~ gp(age)", None, [[0.7]]),
        ("y ~ zs(z)", None, [[]]),
        ("y ~ cs(z)*gp(age)", {"z": CSOptions(2.0, 2.0)}, [[0.4]]),
        ("y ~ cs(z)*gp(age)", {"z": CSOptions(1.5, -0.5)}, [[0.4]]),
        ("y ~ bin(z: 2,4)*gp(age)", None, [[1.2]]),
        ("y ~ cat(z)*gp(age)", {"z": a @ a.T}, [[0.9]]),
    ]
    space = make_space(4)
    for text, options, ell in cases:
        expr = parse_formula(text, space, options)
        theta = HyperParams.make(alpha=[1.3], ell=ell)
        for _ in range(5):
            x = random_points(space, 40, rng)
            assert_symmetric_psd(kernel_matrix(expr, theta, x, x))


def test_sum_and_product_kernels_symmetric_psd() -> None:
    rng = np.random.default_rng(41)
    space = make_space(3, ("age", "t"))
    expr = parse_formula("y ~ gp(age)*gp(t) + zs(z)*gp(age) + gp(t)",
                         space)
    for _ in range(10):
        theta = HyperParams.make(
            alpha=rng.uniform(0.2, 2.0, size=3),
            ell=[rng.uniform(0.1, 1.5, size=2), rng.uniform(0.1, 1.5, size=1),
                 rng.uniform(0.1, 1.5, size=1)])
        x = random_points(space, 50, rng)
        assert_symmetric_psd(kernel_matrix(expr, theta, x, x))
