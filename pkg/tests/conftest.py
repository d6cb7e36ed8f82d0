import numpy as np
import pytest

from pwmsim import (
    PwmParams,
    Sinusoid,
    build_cache,
    nqubit_hamiltonian,
    schedule_controls,
)


@pytest.fixture(scope="session")
def sine():
    """The canonical single control: unit sine at 0.05 MHz (period 20 us)."""
    return Sinusoid(1.0, 0.05, 0.0)


@pytest.fixture(scope="session")
def qubit():
    h0, h1, _ = nqubit_hamiltonian(1, 1.0, 0.0)
    return h0, [h1]


@pytest.fixture(scope="session")
def psi0():
    return np.array([1.0, 0.0], dtype=np.complex128)


@pytest.fixture(scope="session")
def schedule20(sine):
    """M=20 schedule of the canonical control over one period."""
    params = PwmParams.for_controls([sine], 20, 20.0)
    return params, schedule_controls([sine], params)


@pytest.fixture(scope="session")
def cache20(qubit, schedule20):
    h0, hks = qubit
    params, seq = schedule20
    return build_cache(h0, hks, params.xi, seq.sign_vectors())
