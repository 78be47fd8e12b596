import pytest

from faircluster import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Compile (or no-op) every kernel before any timed test runs.
    _kernels.warm_up()
