import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tomobss import KernelSpec, ScattererParams, default_geometry, estimate_gaussian_sigma, kernel_matrix
from tomobss.errors import DegenerateInputError, InvalidInputError
from tomobss.geometry import model_covariance
from tomobss.kernels import column_distances

from conftest import random_stack

# Bandwidth for the exact covariance of scatterers at 40 m (amplitude 1.2) and 80 m
# (amplitude 1) in the default geometry with beta = 5, frozen as a regression value.
FROZEN_SIGMA_ALPHA_1_2 = 2.3306192608489606


def monomials2(x):
    """Explicit feature map with phi(x)^H phi(y) = (x^H y + 1)^2 in two dimensions."""
    x1, x2 = x
    r2 = np.sqrt(2)
    return np.array([x1 * x1, x2 * x2, r2 * x1 * x2, r2 * x1, r2 * x2, 1.0])


def test_spec_aliases_and_validation():
    assert KernelSpec("poly").kind == "polynomial"
    assert KernelSpec("rbf").kind == "gaussian"
    with pytest.raises(InvalidInputError):
        KernelSpec("sigmoid")
    with pytest.raises(InvalidInputError):
        KernelSpec.polynomial(0.0)
    with pytest.raises(InvalidInputError):
        KernelSpec.gaussian(beta=-1.0)
    with pytest.raises(InvalidInputError):
        KernelSpec.gaussian(sigma=0.0)


def test_sigma_two_columns():
    C = np.array([[0.0, 3.0], [0.0, 0.0]], complex)
    assert estimate_gaussian_sigma(C, 5.0) == pytest.approx(15.0)
    assert estimate_gaussian_sigma(C, 10.0) == pytest.approx(30.0)


def test_sigma_regression_fixture():
    g = default_geometry()
    C = model_covariance(g, [ScattererParams(40.0, 1.2), ScattererParams(80.0, 1.0)])
    assert estimate_gaussian_sigma(C, 5.0) == FROZEN_SIGMA_ALPHA_1_2
    assert estimate_gaussian_sigma(C, 5.0) == estimate_gaussian_sigma(C.copy(), 5.0)


def test_sigma_degenerate():
    with pytest.raises(DegenerateInputError):
        estimate_gaussian_sigma(np.ones((3, 3), complex))
    with pytest.raises(InvalidInputError):
        estimate_gaussian_sigma(np.ones((3, 1), complex))


def test_column_distances_uses_complex_modulus():
    C = np.array([[0, 1j], [0, 1]], complex)
    assert column_distances(C)[0, 1] == pytest.approx(np.sqrt(2))


def test_gaussian_unit_diagonal(rng):
    K = kernel_matrix(random_stack(rng), KernelSpec.gaussian())
    np.testing.assert_allclose(np.diag(K), 1.0)
    assert np.isrealobj(K)


def test_gaussian_fixed_sigma(rng):
    C = random_stack(rng, n=4, m=5)
    K, info = kernel_matrix(C, KernelSpec.gaussian(sigma=2.0), return_info=True)
    d = np.linalg.norm(C[:, 0] - C[:, 3])
    assert K[0, 3] == pytest.approx(np.exp(-d * d / 8))
    assert info["sigma"] == 2.0


def test_polynomial_order_one(rng):
    C = random_stack(rng, n=5, m=5)
    K = kernel_matrix(C, KernelSpec.polynomial(1.0))
    np.testing.assert_allclose(K, C.conj().T @ C + 1, atol=1e-12)


def test_linear_kernel(rng):
    C = random_stack(rng, n=5, m=5)
    np.testing.assert_allclose(kernel_matrix(C, KernelSpec.linear()), C.conj().T @ C, atol=1e-12)


def test_degree_two_feature_map_real(rng):
    X = rng.standard_normal((2, 6))
    K = kernel_matrix(X.astype(complex), KernelSpec.polynomial(2.0))
    Phi = np.column_stack([monomials2(x) for x in X.T])
    np.testing.assert_allclose(K, Phi.T @ Phi, atol=1e-10)


def test_degree_two_feature_map_complex(rng):
    X = random_stack(rng, n=2, m=6)
    K = kernel_matrix(X, KernelSpec.polynomial(2.0))
    Phi = np.column_stack([monomials2(x) for x in X.T])
    np.testing.assert_allclose(K, Phi.conj().T @ Phi, atol=1e-10)


@given(st.floats(1.0, 3.0), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_polynomial_hermitian(order, seed):
    C = random_stack(np.random.default_rng(seed), n=4, m=4)
    K, info = kernel_matrix(C, KernelSpec.polynomial(order), return_info=True)
    np.testing.assert_array_equal(K, K.conj().T)
    assert info["branch_cut_pairs"] >= 0


def test_describe():
    assert KernelSpec.polynomial(1.3).describe() == "polynomial(d=1.3)"
    assert KernelSpec.gaussian().describe() == "gaussian(beta=5)"
    assert KernelSpec.linear().describe() == "linear"
