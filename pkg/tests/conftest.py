import os
import warnings

import pytest
from hypothesis import HealthCheck, settings

from spikedbeta.equilibrium import solve_equilibrium
from spikedbeta.potential import REFERENCE_QUARTIC, TWO_WELL_QUARTIC, make_potential

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def _pair(coeffs):
    V = make_potential(coeffs)
    return V, solve_equilibrium(V)


@pytest.fixture(scope="session")
def gauss():
    return _pair([0.0, 0.0, 1.0])


@pytest.fixture(scope="session")
def gauss2():
    return _pair([0.0, 0.0, 2.0])


@pytest.fixture(scope="session")
def quartic():
    return _pair(REFERENCE_QUARTIC)


@pytest.fixture(scope="session")
def two_well():
    return _pair(TWO_WELL_QUARTIC)


@pytest.fixture(scope="session")
def two_well_a0(two_well):
    from spikedbeta import phase
    V, eqm = two_well
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a_c = phase.critical_value(eqm, V)
        return phase.find_secondary_critical(eqm, V, a_c * (1 + 1e-6), a_c + 6, 300), a_c
