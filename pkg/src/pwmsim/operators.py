"""Dense complex matrix algebra for the propagation engines.

Units convention: time in microseconds, Hamiltonian entries in rad/us, so
exp(-i*t*H) is dimensionless.  Everything is dense numpy; the dimension cap
keeps N-qubit constructions at or below 1024 (10 qubits).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionOverflowError, NotHermitianError

HERMITIAN_TOL = 1e-12
DIM_CAP = 1024

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def hermiticity_defect(a: np.ndarray) -> float:
    """Max-abs deviation from A = A^dagger."""
    return float(np.max(np.abs(a - a.conj().T)))


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitianError(f"Hermiticity defect {defect:.3e} exceeds {tol:.1e}")


def unitarity_defect(u: np.ndarray) -> float:
    eye = np.eye(u.shape[0])
    return float(np.max(np.abs(u.conj().T @ u - eye)))


@dataclass(frozen=True)
class EigenSystem:
    """Hermitian eigendecomposition A = D diag(eigenvalues) D^dagger.

    Eigenvalues are ascending; each eigenvector's largest-magnitude component
    is made real-positive so that repeated builds are bit-reproducible.
    """

    eigenvalues: np.ndarray  # real, shape (d,)
    eigenvectors: np.ndarray  # unitary, shape (d, d), columns

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        d = self.eigenvectors
        return (d * self.eigenvalues) @ d.conj().T

    def expm_scaled(self, t: float) -> np.ndarray:
        """exp(-i*t*A) from the stored decomposition."""
        d = self.eigenvectors
        return (d * np.exp(-1j * t * self.eigenvalues)) @ d.conj().T


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = pivots / np.abs(pivots)
    return vecs / phases


def eig_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix with canonical phases."""
    a = np.asarray(a, dtype=np.complex128)
    check_hermitian(a, tol)
    vals, vecs = np.linalg.eigh(a)  # ascending by contract of eigh
    return EigenSystem(vals.astype(np.float64), _fix_phases(vecs))


def expm_hermitian_scaled(a: np.ndarray, t: float) -> np.ndarray:
    """exp(-i*t*A) for Hermitian A, computed by eigendecomposition."""
    return eig_hermitian(a).expm_scaled(t)


def kron_power(base: np.ndarray, n: int, dim_cap: int = DIM_CAP) -> np.ndarray:
    """N-fold Kronecker power base^(x)N."""
    if n < 1:
        raise ValueError(f"kron power needs N >= 1, got {n}")
    d = base.shape[0]
    if d**n > dim_cap:
        raise DimensionOverflowError(f"dim {d}**{n} exceeds cap {dim_cap}")
    out = np.asarray(base, dtype=np.complex128)
    for _ in range(n - 1):
        out = np.kron(out, base)
    return out


def nqubit_hamiltonian(
    n: int, kappa1: float, kappa2: float, dim_cap: int = DIM_CAP
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Test-family Hamiltonians (H0, H1, H2) on N qubits.

    H0 = sigma_z^(x)N / 2^N, H1 = kappa1 * sigma_x^(x)N / 2^N,
    H2 = kappa2 * sigma_y^(x)N / 2^N.
    """
    if not 1 <= n <= 10:
        raise DimensionOverflowError(f"qubit count {n} outside [1, 10]")
    scale = 1.0 / 2**n
    h0 = scale * kron_power(SIGMA_Z, n, dim_cap)
    h1 = kappa1 * scale * kron_power(SIGMA_X, n, dim_cap)
    h2 = kappa2 * scale * kron_power(SIGMA_Y, n, dim_cap)
    return h0, h1, h2
