import warnings

import pytest

from resmix.model import BoundaryFields, MediumParams


@pytest.fixture
def fig2():
    """Equal inputs, matched EIT medium with mu2/mu3 = 0.5 and mu1/mu3 = 0.05."""
    return MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0), BoundaryFields(1.0, 1.0)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield
