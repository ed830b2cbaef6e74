import pytest

from primerace import RaceConfig, characters, find_zeros, kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compile outside any timed block
    kernels.warmup()


@pytest.fixture(scope="session")
def chi4():
    return next(c for c in characters(4) if not c.is_principal)


@pytest.fixture(scope="session")
def chi3():
    return next(c for c in characters(3) if not c.is_principal)


@pytest.fixture(scope="session")
def config431():
    return RaceConfig.make(4, 3, 1)


@pytest.fixture(scope="session")
def zeros4_300(chi4):
    return find_zeros(chi4, 300.0)


@pytest.fixture(scope="session")
def zeros4_60(chi4):
    return find_zeros(chi4, 60.0)
