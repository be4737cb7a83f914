"""
Tests for the finite-difference oracle
"""

import math

import numpy as np
import pytest

from kktower.core.errors import CFLError, PreconditionError
from kktower.schemas.fd import FDConfig
from kktower.schemas.fields import FieldState
from kktower.schemas.scenario import GaussianBump
from kktower.services.brane_service import BraneService
from kktower.services.datum_service import state_builder
from kktower.services.fd_service import FDOracle, robin_ghost_factor
from kktower.services.halfline_service import HalfLineService, make_params
from kktower.services.quadrature_service import composite_gauss_legendre, midpoint_grid


def gaussian_on(grid, z_center=4.0, width=0.5):
    phi = np.exp(-((grid.nodes - z_center) ** 2) / (2.0 * width**2))
    return FieldState(z_grid=grid, phi=phi, dphi_dt=np.zeros_like(phi))


class TestFDConfig:
    """Test step sizing and the stability bounds"""

    def test_for_final_time(self):
        """Test that the step count reaches t_final exactly"""
        config = FDConfig.for_final_time(0.01, 1.0, courant=0.5)
        assert config.steps == 200
        assert abs(config.t_final - 1.0) < 1e-12
        assert abs(config.courant - 0.5) < 1e-12

    def test_radial_courant(self):
        """Test the sqrt(2) factor in two dimensions"""
        config = FDConfig.for_final_time(0.01, 1.0, courant=0.5, h_r=0.01)
        assert config.steps == math.ceil(math.sqrt(2.0) / 0.005)
        assert 0.49 < config.courant <= 0.5
        assert abs(config.courant - config.dt * math.sqrt(2.0) / 0.01) < 1e-15

    def test_geometric_cfl(self, em_params):
        """Test that courant above the limit is refused"""
        grid = midpoint_grid(1.0, 100)
        config = FDConfig(h_z=0.01, dt=0.01, steps=1)
        with pytest.raises(CFLError):
            FDOracle.fd_evolve(gaussian_on(grid, 0.5, 0.05), em_params, config)

    def test_operator_bound(self, grav_params):
        """Test that the horizon cell tightens the step for mu = 15/4"""
        grid = midpoint_grid(1.0, 100)
        config = FDConfig.for_final_time(0.01, 0.1, courant=0.5)
        config.check_cfl()
        with pytest.raises(CFLError, match="operator bound"):
            FDOracle.fd_evolve(gaussian_on(grid, 0.5, 0.05), grav_params, config)

    def test_robin_ghost_factor(self):
        """Test the ghost ratio limits"""
        assert robin_ghost_factor(0.0) == 1.0
        assert 0.0 < robin_ghost_factor(0.01) < 1.0


class TestFDEvolve:
    """Test leapfrog runs"""

    def test_zero_data_stay_zero(self, em_params):
        """Test the trivial solution"""
        grid = midpoint_grid(2.0, 100)
        state = FieldState(z_grid=grid, phi=np.zeros(grid.size), dphi_dt=np.zeros(grid.size))
        run = FDOracle.fd_evolve(state, em_params, FDConfig.for_final_time(0.02, 0.5))
        assert np.all(run.final.phi == 0.0)
        assert run.energy_drift == 0.0

    def test_rejects_quadrature_grid(self, em_params):
        """Test that Gauss-Legendre grids are not staggered grids"""
        grid = composite_gauss_legendre(2.0, 0.5)
        with pytest.raises(PreconditionError):
            FDOracle.fd_evolve(gaussian_on(grid, 1.0, 0.1), em_params, FDConfig.for_final_time(0.01, 0.1))

    def test_robin_needs_unit_interval(self, grav_params):
        """Test that the brane closure needs z_end = 1"""
        grid = midpoint_grid(2.0, 200)
        config = FDConfig.for_final_time(0.01, 0.1, courant=0.4, bc_right="robin_3_2")
        with pytest.raises(PreconditionError):
            FDOracle.fd_evolve(gaussian_on(grid, 1.0, 0.1), grav_params, config)

    def test_operator_is_symmetric(self, grav_params):
        """Test symmetry of the discrete operator with the Robin closure"""
        grid = midpoint_grid(1.0, 50)
        config = FDConfig.for_final_time(0.02, 0.1, courant=0.4, bc_right="robin_3_2")
        op = FDOracle.operator(grid, None, grav_params, config)
        assert abs(op - op.T).max() == 0.0

    def test_half_line_matches_spectral(self, em_params, em_tower):
        """Test the Gaussian datum against the half-line tower at t = 2"""
        grid = midpoint_grid(12.0, 2400)
        run = FDOracle.fd_evolve(gaussian_on(grid), em_params, FDConfig.for_final_time(grid.panel_width, 2.0))
        assert run.energy_drift < 1e-10
        spectral = HalfLineService.reconstruct(em_tower, 2.0, grid)
        report = FDOracle.compare_with_spectral(run.final, spectral)
        assert report.passed
        times, energies = FDOracle.fd_energy(run)
        assert times.size == energies.size == run.config.steps

    def test_brane_mode_matches_cosine(self, grav_spectrum):
        """Test a pure brane mode against cos(lambda_0 t) u_0 with the Robin closure"""
        grid = midpoint_grid(1.0, 400)
        u0 = BraneService.eval_mode(grav_spectrum, 0, grid.nodes)
        state = FieldState(z_grid=grid, phi=u0, dphi_dt=np.zeros_like(u0))
        config = FDConfig.for_final_time(grid.panel_width, 1.0, courant=0.4, bc_right="robin_3_2")
        run = FDOracle.fd_evolve(state, grav_spectrum.params, config, save_every=config.steps)
        exact = FieldState(t=1.0, z_grid=grid, phi=math.cos(grav_spectrum.eigenvalues[0]) * u0, dphi_dt=np.zeros_like(u0))
        report = FDOracle.compare_with_spectral(run.final, exact)
        assert report.passed
        assert len(run.states) == 2


class TestConvergenceStudy:
    """Test observed orders of the leapfrog scheme"""

    def test_space_refinement(self):
        """Test second order under joint refinement of h and dt"""
        params = make_params(0.75)
        builder = state_builder(GaussianBump(kind="gaussian_bump", z_center=4.0, width=0.5), params)
        report = FDOracle.convergence_study(builder, params, z_end=12.0, h=0.04, t_final=1.0)
        assert report.passed
        assert 1.7 <= report.measured["order_0"] <= 2.3

    def test_needs_two_refinements(self):
        """Test the minimum refinement count"""
        params = make_params(0.75)
        builder = state_builder(GaussianBump(kind="gaussian_bump", z_center=4.0, width=0.5), params)
        with pytest.raises(PreconditionError):
            FDOracle.convergence_study(builder, params, z_end=12.0, h=0.04, t_final=1.0, refinements=1)
