"""
Tests for packet reflection and the Euclidean lift
"""

import numpy as np
import pytest

from kktower.core.errors import PreconditionError, TrackingError
from kktower.schemas.scenario import Packet
from kktower.services.datum_service import sample_datum
from kktower.services.halfline_service import HalfLineService
from kktower.services.packet_service import lift_residual, lift_residual_study, track_packet
from kktower.services.quadrature_service import composite_gauss_legendre, data_panel_width, midpoint_grid, spectral_grid

TIMES = np.arange(0.0, 10.25, 0.25).tolist()


@pytest.fixture
def packet_tower(em_params):
    """Incoming packet at z = 5 with carrier kappa = -20 and sigma = 1/2"""
    datum = Packet(kind="packet", z_center=5.0, kappa=-20.0, sigma=0.5)
    state = sample_datum(datum, em_params, composite_gauss_legendre(9.0, data_panel_width(36.0)))
    return HalfLineService.decompose(state, em_params, spectral_grid(36.0, 9.0 + 12.0))


class TestTrackPacket:
    """Test the ray picture of reflection at the horizon"""

    def test_bounce(self, packet_tower):
        """Test speed 1 in and out with the turn at t = z0"""
        trajectory, report = track_packet(packet_tower, TIMES, expected_bounce=5.0)
        assert trajectory.bounce_time is not None
        assert abs(trajectory.v_in + 1.0) < 0.05
        assert abs(trajectory.v_out - 1.0) < 0.05
        assert abs(trajectory.bounce_time - 5.0) < 0.25
        assert report.measured["energy_drift"] < 1e-8
        assert report.passed
        assert trajectory.peaks.shape == (41,)

    def test_lost_peak(self, packet_tower):
        """Test that a threshold above the initial peak stops tracking"""
        with pytest.raises(TrackingError):
            track_packet(packet_tower, TIMES, threshold=2.0)

    def test_needs_integer_nu(self, generic_params, gaussian_datum):
        """Test the precondition on mu"""
        tower = HalfLineService.decompose(gaussian_datum, generic_params, spectral_grid(12.0, 14.0))
        with pytest.raises(PreconditionError):
            track_packet(tower, TIMES)


class TestLift:
    """Test the free-wave residual of the lifted field"""

    def test_residual_falls_with_h(self, em_tower):
        """Test second-order decay of the residual under refinement"""
        report = lift_residual_study(em_tower, 2.0, 0.05, refinements=2)
        assert report.passed
        assert report.measured["residual_h2"] < report.measured["residual_h0"]

    def test_needs_uniform_grid(self, em_tower):
        """Test that quadrature grids are refused"""
        z_grid, _ = HalfLineService.target_grids(em_tower, 2.0)
        series = HalfLineService.evolve_series(em_tower, [1.9, 2.0, 2.1], z_grid)
        with pytest.raises(PreconditionError):
            lift_residual(series, em_tower.params)

    def test_needs_three_levels(self, em_tower):
        """Test the time-level count"""
        grid = midpoint_grid(10.0, 200)
        series = HalfLineService.evolve_series(em_tower, [1.0, 1.05], grid)
        with pytest.raises(PreconditionError):
            lift_residual(series, em_tower.params)
