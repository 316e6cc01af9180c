import numpy as np
import pytest

from ahardy import hardy, orbit_series as osr
from ahardy.group import cyclic_presentation, enumerate_words, trivial_presentation

T0 = complex(np.exp(1.3j))


@pytest.fixture(scope="session")
def cyclic():
    """Cyclic s=1/2 group at L=16 with its orbit data and factorization."""
    pres = cyclic_presentation(0.5)
    trunc = enumerate_words(pres, 16)
    od = osr.orbit_data(trunc, T0)
    return pres, trunc, od, hardy.factor_martin_derivative(od, trunc)


@pytest.fixture(scope="session")
def trivial():
    trunc = enumerate_words(trivial_presentation(), 2)
    od = osr.orbit_data(trunc, T0)
    return trunc, od, hardy.factor_martin_derivative(od, trunc)


def disk_points(rng, n, rmax=0.95):
    return np.sqrt(rng.uniform(0, rmax ** 2, n)) * np.exp(2j * np.pi * rng.uniform(size=n))


@pytest.fixture(scope="session")
def bank(cyclic):
    from ahardy import kernels
    b = kernels.KernelBank(cyclic[3], kernels.KernelSettings(), 16)
    b.solve_all(b.characters())
    return b


@pytest.fixture(scope="session")
def trivial_bank(trivial):
    from ahardy import kernels
    return kernels.KernelBank(trivial[2], kernels.KernelSettings(), 16)
