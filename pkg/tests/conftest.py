import pytest

import fretsim as fs


@pytest.fixture(scope="session")
def reference_rates():
    """Default operating point of the kinetics."""
    return fs.RateSet(1.0, 1.0, 1.0, f=0.1)


@pytest.fixture(scope="session")
def reference_ou():
    """Default operating point of the rate noise."""
    return fs.OUParams(lam=1.0 / 7.0, diffusion=7.0, baseline=0.65)
