import pytest

from fracspde import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # trigger jit compilation once so timed tests measure compute, not compile
    _kernels.warmup()
