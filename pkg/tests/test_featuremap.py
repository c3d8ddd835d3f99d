import json

import numpy as np
import pytest

from mdgp.featuremap import BasisConfig, FeatureBasis, approx_kernel_matrix, \
    build_basis, build_feature_map, latent_values
from mdgp.floatarray import FloatArray
from mdgp.formula import parse_formula
from mdgp.hyperparams import HyperParams
from mdgp.kernelexpr import kernel_matrix
from mdgp.usererror import BasisTooLargeError, DataError, KernelSpecError

from tests.helpers import make_space, random_points

FORMULA = "y ~ gp(age) + zs(z)*gp(age)"


def grid(n: int = 50) -> FloatArray:
    return np.linspace(-1.0, 1.0, n)[:, None]


def eq_error(ell: float, num_basis: int, domain_scale: float) -> float:
    expr = parse_formula("y ~ gp(age)", make_space(0))
    x = grid()
    fm = build_feature_map(x, expr, BasisConfig(num_basis, domain_scale))
    theta = HyperParams.make(alpha=[1.0], ell=[[ell]])
    return float(np.max(np.abs(approx_kernel_matrix(fm, theta)
                               - kernel_matrix(expr, theta, x, x))))


def test_column_counts() -> None:
    rng = np.random.default_rng(0)
    space = make_space(3)
    x = random_points(space, 30, rng)
    basis = build_basis(x, parse_formula(FORMULA, space), BasisConfig(16))
    assert basis.num_columns == 48
    assert basis.num_columns_full == 64
    assert [s.stop - s.start for s in basis.component_slices] == [16, 32]
    assert len(basis.column_labels()) == 48
    assert basis.column_index[16] == (1, (1, 1))

    single = build_basis(x, parse_formula("y ~ gp(age)", space),
                         BasisConfig(8))
    assert single.num_columns == 8


def test_domain_is_centred_on_the_data() -> None:
    expr = parse_formula("y ~ gp(age)", make_space(0))
    x = np.array([[2.0], [6.0], [3.0]])
    factor = build_basis(x, expr, BasisConfig(4, 1.5)).terms[0].continuous[0]
    assert factor.center == pytest.approx(4.0)
    assert factor.L == pytest.approx(3.0)


@pytest.mark.parametrize("ell", [0.5, 1.0, 2.0])
def test_eq_error_shrinks_with_basis_size(ell: float) -> None:
    # A domain wide enough for the lengthscale keeps the boundary error
    # far below the truncation error.
    domain_scale = 1.0 + 4.0 * ell
    errors = [eq_error(ell, b, domain_scale) for b in (4, 8, 16, 32)]
    for before, after in zip(errors, errors[1:]):
        assert after <= before + 1e-9
    assert errors[-1] < 1e-4


def test_narrow_domain_is_limited_by_the_boundary() -> None:
    assert eq_error(1.0, 64, 1.5) > 0.1
    assert eq_error(0.1, 64, 1.5) < 1e-6


def test_zero_delta_gives_zero_matrix() -> None:
    rng = np.random.default_rng(1)
    space = make_space(3)
    x = random_points(space, 10, rng)
    fm = build_feature_map(x, parse_formula(FORMULA, space), BasisConfig(6))
    # Tiny magnitudes underflow delta to zero.
    theta = HyperParams.make(alpha=[1e-200, 1e-200], ell=[[1.0], [1.0]])
    np.testing.assert_array_equal(approx_kernel_matrix(fm, theta), 0.0)


def test_psi_factorization() -> None:
    rng = np.random.default_rng(2)
    space = make_space(3)
    x = random_points(space, 20, rng)
    fm = build_feature_map(x, parse_formula(FORMULA, space), BasisConfig(6))
    theta = HyperParams.make(alpha=[1.2, 0.8], ell=[[0.7], [1.4]])
    psi = fm.psi(theta)
    np.testing.assert_allclose(psi @ psi.T, approx_kernel_matrix(fm, theta))

    xi = rng.normal(size=fm.num_columns)
    np.testing.assert_allclose(fm.latent(theta, xi), psi @ xi)
    parts = sum(fm.latent(theta, xi, sl) for sl in fm.component_slices)
    np.testing.assert_allclose(parts, psi @ xi)


def test_latent_values_over_draws() -> None:
    rng = np.random.default_rng(3)
    psi_dagger = rng.normal(size=(5, 4))
    sqrt_delta = rng.uniform(size=4)
    xi = rng.normal(size=(7, 4))
    got = latent_values(psi_dagger, sqrt_delta, xi)
    assert got.shape == (5, 7)
    np.testing.assert_allclose(got[:, 2], psi_dagger @ (sqrt_delta * xi[2]))


def test_sqrt_delta_jacobian() -> None:
    rng = np.random.default_rng(4)
    space = make_space(3)
    x = random_points(space, 10, rng)
    basis = build_basis(x, parse_formula(FORMULA, space), BasisConfig(5))
    log_params = np.log([1.3, 0.6, 0.9, 1.7])

    def sqrt_delta(v: FloatArray) -> FloatArray:
        theta = HyperParams.from_vector((1, 1), (), np.exp(v))
        ret: FloatArray = basis.sqrt_delta(theta)
        return ret

    jac = basis.sqrt_delta_jacobian(
        HyperParams.from_vector((1, 1), (), np.exp(log_params)))
    h = 1e-6
    for i in range(log_params.size):
        step = np.zeros(log_params.size)
        step[i] = h
        numeric = (sqrt_delta(log_params + step)
                   - sqrt_delta(log_params - step)) / (2 * h)
        np.testing.assert_allclose(jac[i], numeric, rtol=1e-6, atol=1e-9)


def test_json_round_trip() -> None:
    rng = np.random.default_rng(5)
    space = make_space(3)
    expr = parse_formula(FORMULA, space)
    x = random_points(space, 15, rng)
    basis = build_basis(x, expr, BasisConfig(7, 2.0))
    raw = json.loads(json.dumps(basis.to_json()))
    back = FeatureBasis.from_json(raw, expr)
    assert back.num_columns == basis.num_columns
    np.testing.assert_allclose(back.evaluate(x), basis.evaluate(x))


def test_basis_cap() -> None:
    rng = np.random.default_rng(6)
    space = make_space(3)
    x = random_points(space, 5, rng)
    with pytest.raises(BasisTooLargeError):
        build_basis(x, parse_formula(FORMULA, space),
                    BasisConfig(100, max_basis_total=50))


def test_config_checks() -> None:
    with pytest.raises(KernelSpecError):
        BasisConfig(0)
    with pytest.raises(KernelSpecError):
        BasisConfig(8, 1.0)


def test_constant_covariate() -> None:
    expr = parse_formula("y ~ gp(age)", make_space(0))
    with pytest.raises(DataError):
        build_basis(np.ones((4, 1)), expr, BasisConfig(4))


def test_out_of_domain() -> None:
    expr = parse_formula("y ~ gp(age)", make_space(0))
    basis = build_basis(grid(), expr, BasisConfig(4, 1.5))
    assert basis.out_of_domain(np.array([[0.0], [1.4], [1.6], [-2.0]])) == 2
