import numpy as np
import pytest

from haarenergy.spectral import HamiltonianSpectrum, StateSpectrum


def random_hamiltonian(rng, d, kind=None):
    """Energy spectra from several families, including outlier-dominated ones."""
    kind = rng.integers(5) if kind is None else kind
    if kind == 0:
        e = rng.normal(size=d)
    elif kind == 1:
        e = 0.01 * rng.normal(size=d)
        e[rng.integers(d)] = 5.0
    elif kind == 2:
        e = rng.choice([-1.0, 1.0], size=d)
    elif kind == 3:
        e = rng.exponential(size=d)
    else:
        e = rng.uniform(-1, 1, size=d) ** 5
    if np.ptp(e) == 0:
        e[0] += 1.0
    return HamiltonianSpectrum(e * rng.uniform(0.2, 3.0) + rng.normal())


def random_state(rng, d, kind=None):
    kind = rng.integers(5) if kind is None else kind
    if kind == 0:
        lam = rng.dirichlet(np.ones(d))
    elif kind == 1:
        lam = rng.dirichlet(np.full(d, 0.05))
    elif kind == 2:
        lam = np.zeros(d)
        lam[: max(1, d // 3)] = 1.0
    elif kind == 3:
        lam = np.exp(-rng.uniform(0.1, 10) * np.arange(d))
    else:
        lam = np.abs(1.0 + 0.05 * rng.normal(size=d))
    lam = lam / lam.sum()
    return StateSpectrum(lam)


def random_pair(rng, d, pure=False):
    rho = StateSpectrum.pure(d) if pure else random_state(rng, d)
    return rho, random_hamiltonian(rng, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
