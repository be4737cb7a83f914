"""
Tests for the named verification checks
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from kktower.core.errors import FitError, PreconditionError
from kktower.schemas.fields import FieldState
from kktower.schemas.reports import VerificationReport
from kktower.services.brane_service import BraneService
from kktower.services.halfline_service import HalfLineService
from kktower.services.quadrature_service import spectral_grid
from kktower.services.verify_service import (
    check_brane_spectrum,
    check_conservation,
    check_equipartition,
    check_finite_speed,
    check_lacuna,
    fit_decay,
    weighted_sup_series,
)


@pytest.fixture
def generic_tower(generic_params, gaussian_datum):
    return HalfLineService.decompose(gaussian_datum, generic_params, spectral_grid(12.0, 14.0))


class TestReportSemantics:
    """Test outcome rules of VerificationReport"""

    def test_plain_outcome(self):
        """Test that an ordinary check is ok when it passes"""
        assert VerificationReport(check_name="c", passed=True, tolerance=1.0).outcome_ok
        assert not VerificationReport(check_name="c", passed=False, tolerance=1.0).outcome_ok

    def test_negative_control_inverts(self):
        """Test that a negative control is ok when it fails"""
        report = VerificationReport(check_name="c", passed=False, tolerance=1.0, negative_control=True)
        assert report.outcome_ok

    def test_informational_never_gates(self):
        """Test that informational reports are always ok"""
        report = VerificationReport(check_name="c", passed=False, tolerance=1.0, informational=True)
        assert report.outcome_ok

    def test_measured_must_be_finite(self):
        """Test that NaN measurements are rejected"""
        with pytest.raises(ValidationError):
            VerificationReport(check_name="c", passed=True, tolerance=1.0, measured={"x": math.nan})


class TestConservation:
    """Test energy conservation reports"""

    def test_half_line(self, em_tower):
        """Test that the Gaussian tower conserves energy on the grid"""
        report = check_conservation(em_tower, [0.0, 1.0, 2.0, 3.0, 4.0])
        assert report.passed
        assert report.measured["max_rel_deviation_spectral"] < 1e-12
        assert report.measured["grid_vs_spectral_t0"] < 1e-7

    def test_brane_pure_mode(self, grav_spectrum):
        """Test conservation of a single brane mode"""
        grid = BraneService.data_grid(grav_spectrum)
        phi = BraneService.eval_mode(grav_spectrum, 1, grid.nodes)
        tower = BraneService.brane_decompose(
            FieldState(z_grid=grid, phi=phi, dphi_dt=np.zeros_like(phi)), grav_spectrum
        )
        report = check_conservation(tower, [0.0, 0.5, 1.0, 2.0])
        assert report.passed

    def test_needs_two_times(self, em_tower):
        """Test the precondition on the time list"""
        with pytest.raises(PreconditionError):
            check_conservation(em_tower, [1.0])


class TestFiniteSpeed:
    """Test the light-cone mass check"""

    def test_inside_cone(self, em_tower):
        """Test that no mass leaves z <= R + t"""
        report = check_finite_speed(em_tower, R=8.0, t=2.0)
        assert report.passed
        assert report.measured["relative_mass_outside"] < 1e-6

    def test_negative_control(self, em_tower):
        """Test that a zero-speed cone is violated"""
        report = check_finite_speed(em_tower, R=4.0, t=4.0, slope=0.0, negative_control=True)
        assert not report.passed
        assert report.outcome_ok
        assert report.measured["relative_mass_outside"] > 0.1


class TestLacunaAndEquipartition:
    """Test hypotheses and degenerate windows of the sharp-Huygens checks"""

    def test_lacuna_empty_region(self, em_tower):
        """Test that |t| <= R gives an informational report"""
        report = check_lacuna(em_tower, R=8.0, t=2.0)
        assert report.informational
        assert report.outcome_ok

    def test_lacuna_needs_even_nu(self, generic_tower):
        """Test that mu = 1 is refused"""
        with pytest.raises(PreconditionError):
            check_lacuna(generic_tower, R=8.0, t=10.0)

    def test_equipartition_before_r(self, em_tower):
        """Test that no late times give an informational report"""
        report = check_equipartition(em_tower, R=8.0, times=[0.0, 1.0])
        assert report.informational
        assert "gap_t0" in report.measured

    def test_equipartition_at_rest(self, em_tower):
        """Test that data at rest start fully potential"""
        report = check_equipartition(em_tower, R=0.0, times=[0.0])
        assert not report.passed
        assert abs(report.measured["gap_t0"] - 1.0) < 1e-12

    def test_equipartition_needs_even_nu(self, generic_tower):
        """Test the hypothesis check"""
        with pytest.raises(PreconditionError):
            check_equipartition(generic_tower, R=1.0, times=[2.0])
        report = check_equipartition(generic_tower, R=1.0, times=[2.0], enforce_hypothesis=False)
        assert "max_gap_after_R" in report.measured


class TestDecayFit:
    """Test log-log fits"""

    def test_exact_power(self):
        """Test that a pure power law is recovered"""
        times = np.arange(1.0, 11.0)
        fit = fit_decay(times, 3.0 * times**-1.5)
        assert abs(fit.exponent + 1.5) < 1e-12
        assert abs(fit.intercept - math.log(3.0)) < 1e-12
        assert fit.r_squared > 0.999999

    def test_window(self):
        """Test that the window restricts the points"""
        times = np.arange(1.0, 21.0)
        values = np.where(times < 10, 1.0, times**-2.0)
        fit = fit_decay(times, values, window=(10.0, 20.0))
        assert fit.points == 11
        assert abs(fit.exponent + 2.0) < 1e-12

    def test_too_few_points(self):
        """Test the minimum point count"""
        with pytest.raises(FitError):
            fit_decay([1.0, 2.0, 3.0], [1.0, 0.5, 0.3])

    def test_non_positive_values(self):
        """Test that zeros cannot be fitted in log space"""
        with pytest.raises(FitError):
            fit_decay(np.arange(1.0, 7.0), [1.0, 0.5, 0.0, 0.2, 0.1, 0.05])

    def test_weighted_sup_series(self, em_tower):
        """Test one value per time"""
        values = weighted_sup_series(em_tower, [0.0, 1.0, 2.0])
        assert len(values) == 3
        assert all(v > 0 for v in values)

    def test_zero_weight_is_plain_sup(self, em_tower):
        """Test that weight exponent 0 measures sup |Phi|"""
        grids = HalfLineService.target_grids(em_tower, 2.0)
        (value,) = weighted_sup_series(em_tower, [2.0], grids, weight_exponent=0.0)
        state = HalfLineService.synthesizer(em_tower, *grids).state(2.0)
        assert value == pytest.approx(float(np.max(np.abs(state.phi))), rel=1e-14)


class TestBraneSpectrumCheck:
    """Test the packaged spectrum report"""

    def test_gravitational(self, grav_params):
        """Test the comparison with zeros of J_1 and the closed form"""
        report = check_brane_spectrum(grav_params)
        assert report.passed
        assert abs(report.measured["lambda_0"] - 3.8317059702075125) < 1e-10
        assert report.measured["max_zero_mismatch"] < 1e-10

    def test_generic(self, generic_params):
        """Test that other masses skip the closed-form comparison"""
        report = check_brane_spectrum(generic_params, count=6)
        assert report.passed
        assert "max_zero_mismatch" not in report.measured
