"""Shared fixtures.

The design-point solves are cheap but used by many tests, so they are
session-scoped.
"""

import pytest

from coexpm import phasematch as pm


@pytest.fixture(scope="session")
def nbpm():
    return pm.NBPM_PROCESS


@pytest.fixture(scope="session")
def qpm():
    return pm.QPM_PROCESS


@pytest.fixture(scope="session")
def design_point(nbpm):
    """Pump/signal/idler tuned so the birefringent process needs a 2 mm grating."""
    _, point = pm.solve_pump_for_period(2.0, temperature_c=25.0)
    return point
