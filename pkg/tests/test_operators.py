import numpy as np
import pytest

from pwmsim import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    eig_hermitian,
    expm_hermitian_scaled,
    kron_power,
    nqubit_hamiltonian,
)
from pwmsim.exceptions import DimensionOverflowError, NotHermitianError
from pwmsim.operators import hermiticity_defect, unitarity_defect


def test_pauli_algebra():
    assert np.allclose(SIGMA_X @ SIGMA_Y - SIGMA_Y @ SIGMA_X, 2j * SIGMA_Z)
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        assert hermiticity_defect(s) == 0.0
        assert np.allclose(s @ s, np.eye(2))


def test_eig_hermitian_reconstructs_and_orders():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    a = a + a.conj().T
    es = eig_hermitian(a)
    assert np.all(np.diff(es.eigenvalues) >= 0)
    assert np.max(np.abs(es.reconstruct() - a)) < 1e-12
    assert unitarity_defect(es.eigenvectors) < 1e-12


def test_eig_hermitian_deterministic_phases():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a = a + a.conj().T
    v1 = eig_hermitian(a).eigenvectors
    v2 = eig_hermitian(a.copy()).eigenvectors
    assert np.array_equal(v1, v2)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitianError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_expm_unitary_and_exact_on_pauli():
    t = 0.7
    u = expm_hermitian_scaled(SIGMA_Z, t)
    assert unitarity_defect(u) < 1e-14
    # exp(-i t sigma_z) = diag(e^{-it}, e^{it})
    assert np.allclose(u, np.diag([np.exp(-1j * t), np.exp(1j * t)]))


def test_kron_power_shapes_and_cap():
    assert kron_power(SIGMA_X, 3).shape == (8, 8)
    with pytest.raises(DimensionOverflowError):
        kron_power(SIGMA_X, 11)
    with pytest.raises(ValueError):
        kron_power(SIGMA_X, 0)


def test_nqubit_hamiltonian_single_qubit():
    h0, h1, h2 = nqubit_hamiltonian(1, 2.0, 3.0)
    assert np.allclose(h0, SIGMA_Z / 2)
    assert np.allclose(h1, SIGMA_X)  # kappa1=2 over 2^1
    assert np.allclose(h2, 1.5 * SIGMA_Y)


def test_nqubit_hamiltonian_scaling_and_range():
    h0, _, _ = nqubit_hamiltonian(3, 1.0, 0.0)
    assert h0.shape == (8, 8)
    assert np.max(np.abs(np.linalg.eigvalsh(h0))) == pytest.approx(1 / 8)
    with pytest.raises(DimensionOverflowError):
        nqubit_hamiltonian(11, 1.0, 0.0)


def test_even_qubit_count_commutes():
    h0, h1, _ = nqubit_hamiltonian(2, 1.0, 0.0)
    assert np.max(np.abs(h0 @ h1 - h1 @ h0)) == 0.0
