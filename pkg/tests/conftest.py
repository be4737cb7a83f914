"""
Pytest configuration and fixtures for testing
"""

import csv
from pathlib import Path

import numpy as np
import pytest

from kktower.core.config import get_settings
from kktower.schemas.fields import FieldState
from kktower.services.brane_service import BraneService
from kktower.services.halfline_service import HalfLineService, make_params
from kktower.services.quadrature_service import composite_gauss_legendre, data_panel_width, spectral_grid

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test sees default settings, single-threaded"""
    monkeypatch.setenv("THREADS", "1")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def bessel_golden():
    """Rows of (kind, order, x_or_index, value, tolerance)"""
    with (FIXTURES / "bessel_golden.csv").open(newline="") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture
def em_params():
    """mu = 3/4: lambda = 1, nu = 2"""
    return make_params(0.75)


@pytest.fixture
def grav_params():
    """mu = 15/4: lambda = 2, nu = 4"""
    return make_params(3.75)


@pytest.fixture
def generic_params():
    return make_params(1.0)


def gaussian_state(z_center=4.0, width=0.5, z_end=8.0, m_max=12.0, k=0.0):
    """x-independent Gaussian at rest on a data grid resolving masses up to m_max"""
    grid = composite_gauss_legendre(z_end, data_panel_width(m_max))
    phi = np.exp(-((grid.nodes - z_center) ** 2) / (2.0 * width**2))
    return FieldState(t=0.0, z_grid=grid, transverse_k=k, phi=phi, dphi_dt=np.zeros_like(phi))


@pytest.fixture
def gaussian_datum():
    return gaussian_state()


@pytest.fixture
def em_tower(em_params, gaussian_datum):
    """Continuous tower of the Gaussian datum for mu = 3/4, accurate up to |t| = 4"""
    m_grid = spectral_grid(12.0, gaussian_datum.z_grid.domain_end + 6.0)
    return HalfLineService.decompose(gaussian_datum, em_params, m_grid)


@pytest.fixture
def grav_spectrum(grav_params):
    return BraneService.brane_spectrum(grav_params, 10)


def make_runner_args(scenario, out, command="verify"):
    """argv for kktower.main"""
    return [command, "--scenario", str(scenario), "--out", str(out)]
