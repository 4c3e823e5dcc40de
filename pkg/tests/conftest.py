"""Shared fixtures.

Models are session-scoped on purpose: marginal-profile and dense-curve
caches live on the model instance, so reusing one instance across test
modules amortizes the expensive fiber quadrature.
"""

import pytest

from thinshell import make_fnr


@pytest.fixture(scope="session")
def fnr_10_20():
    """Reference isotropic power-law model in dimension 10, tail rank 20."""
    return make_fnr(10, 20.0)


@pytest.fixture(scope="session")
def fnr_3_8():
    """Small radial model for body and identity checks."""
    return make_fnr(3, 8.0)


@pytest.fixture(scope="session")
def fnr_2_7():
    """Planar radial model for body checks."""
    return make_fnr(2, 7.0)
