import numpy as np
import pytest

from qbattery.bloch import gell_mann_basis
from qbattery.linalg import (
    DensityMatrix,
    partial_trace,
    partial_transpose_min_eig,
    purity,
    random_density_matrix,
    random_hermitian,
    random_pure_state,
    swap_operator,
    subsystem_permutation,
)

from conftest import bell_state


def test_density_matrix_rejects_non_hermitian():
    m = np.array([[0.5, 0.5], [0.0, 0.5]])
    with pytest.raises(ValueError, match="Hermitian"):
        DensityMatrix(m)


def test_density_matrix_rejects_bad_trace():
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(np.eye(2))


def test_density_matrix_rejects_negative_eigenvalue():
    m = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ValueError, match="negative eigenvalue"):
        DensityMatrix(m)


def test_density_matrix_accepts_tiny_negative_rounding():
    DensityMatrix(np.diag([1 + 5e-10, -5e-10]))


def test_partial_trace_of_product(rng):
    for d in (2, 3):
        ta = random_density_matrix(rng, d)
        tb = random_density_matrix(rng, d)
        rho = DensityMatrix(np.kron(ta.data, tb.data))
        np.testing.assert_allclose(partial_trace(rho, "A", d).data, ta.data, atol=1e-12)
        np.testing.assert_allclose(partial_trace(rho, "B", d).data, tb.data, atol=1e-12)


def test_partial_trace_of_bell_is_maximally_mixed():
    red = partial_trace(bell_state(), "A", 2)
    np.testing.assert_allclose(red.data, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_preserves_trace(rng):
    rho = random_density_matrix(rng, 9)
    assert abs(np.trace(partial_trace(rho, "B", 3).data) - 1) < 1e-12


def test_ppt_of_product_state(rng):
    for d in (2, 3):
        rho = np.kron(random_density_matrix(rng, d).data, random_density_matrix(rng, d).data)
        assert partial_transpose_min_eig(rho, d) >= -1e-12


def test_ppt_of_bell_state():
    assert abs(partial_transpose_min_eig(bell_state(), 2) + 0.5) < 1e-12


def test_swap_properties(rng):
    for d in (2, 3, 4):
        s = swap_operator(d)
        np.testing.assert_allclose(s, s.conj().T, atol=1e-14)
        np.testing.assert_allclose(s @ s, np.eye(d * d), atol=1e-14)
        assert abs(np.trace(s) - d) < 1e-12
        a = random_hermitian(rng, d)
        b = random_hermitian(rng, d)
        lhs = np.trace(s @ np.kron(a, b))
        rhs = np.trace(a @ b)
        assert abs(lhs - rhs) < 1e-10


def test_swap_equals_basis_sum():
    # dual construction route: S = (1 + sum_i lam_i (x) lam_i) / d
    for d in (2, 3, 4):
        lam = gell_mann_basis(d).matrices
        alt = (np.eye(d * d) + np.einsum("iab,icd->acbd", lam, lam).reshape(d * d, d * d)) / d
        np.testing.assert_allclose(swap_operator(d), alt, atol=1e-12)


def test_swap_rejects_small_dimension():
    with pytest.raises(ValueError):
        swap_operator(1)


def test_subsystem_permutation_action():
    d = 3
    p = subsystem_permutation((1, 0), (d, d))
    psi = np.zeros(d * d)
    psi[1 * d + 2] = 1.0  # |1,2>
    out = p @ psi
    assert out[2 * d + 1] == 1.0 and out.sum() == 1.0


def test_purity_range(rng):
    assert abs(purity(np.eye(4) / 4) - 0.25) < 1e-14
    assert abs(purity(random_pure_state(rng, 5)) - 1) < 1e-12
