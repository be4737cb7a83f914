"""
Tests for Bessel evaluation, zeros and the brane eigenvalue condition
"""

import numpy as np
import pytest

from kktower.core.errors import DomainError
from kktower.services.specfun_service import (
    bessel_j,
    bessel_j_deriv,
    bessel_zeros,
    eigen_condition_diagnostic,
    mcmahon_seed,
    robin_eigenvalues,
    robin_function,
)


class TestBesselValues:
    """Test J_order and its derivative"""

    def test_golden_values(self, bessel_golden):
        """Test tabulated values of J_order(x)"""
        rows = [r for r in bessel_golden if r["kind"] == "value"]
        assert rows
        for row in rows:
            value = bessel_j(float(row["order"]), float(row["x_or_index"]))
            assert abs(value - float(row["value"])) < float(row["tolerance"])

    def test_scalar_in_scalar_out(self):
        """Test that a scalar argument gives a float"""
        assert isinstance(bessel_j(1.0, 2.0), float)
        assert isinstance(bessel_j(1.0, np.array([1.0, 2.0])), np.ndarray)

    def test_derivative_matches_difference_quotient(self):
        """Test J' against a centred difference"""
        x = np.linspace(0.5, 20.0, 40)
        eps = 1e-6
        quotient = (bessel_j(2.5, x + eps) - bessel_j(2.5, x - eps)) / (2 * eps)
        assert np.max(np.abs(bessel_j_deriv(2.5, x) - quotient)) < 1e-8

    def test_half_integer_order_is_elementary(self):
        """Test J_1/2(x) = sqrt(2 / (pi x)) sin x"""
        x = np.linspace(0.1, 30.0, 100)
        expected = np.sqrt(2.0 / (np.pi * x)) * np.sin(x)
        assert np.max(np.abs(bessel_j(0.5, x) - expected)) < 1e-13

    @pytest.mark.parametrize("order, x", [(-1.0, 1.0), (1.0, -0.5), (float("nan"), 1.0)])
    def test_domain_errors(self, order, x):
        """Test negative order, negative argument and NaN"""
        with pytest.raises(DomainError):
            bessel_j(order, x)

    def test_derivative_rejects_zero(self):
        """Test that J' is not evaluated at x = 0"""
        with pytest.raises(DomainError):
            bessel_j_deriv(1.0, 0.0)


class TestBesselZeros:
    """Test zeros of J_order"""

    def test_golden_zeros(self, bessel_golden):
        """Test tabulated zeros"""
        rows = [r for r in bessel_golden if r["kind"] == "zero"]
        for row in rows:
            k = int(row["x_or_index"])
            zeros = bessel_zeros(float(row["order"]), k)
            assert len(zeros) == k
            assert abs(zeros[-1] - float(row["value"])) < float(row["tolerance"])

    def test_zeros_increase_and_vanish(self):
        """Test ordering and that J vanishes at each zero"""
        zeros = np.array(bessel_zeros(1.5, 12))
        assert np.all(np.diff(zeros) > 0)
        assert np.max(np.abs(bessel_j(1.5, zeros))) < 1e-13

    def test_mcmahon_seed_is_close_for_large_index(self):
        """Test that the asymptotic seed approaches the zero"""
        zeros = bessel_zeros(1.0, 20)
        assert abs(zeros[-1] - mcmahon_seed(1.0, 20)) < 1e-3

    def test_count_must_be_positive(self):
        """Test that count = 0 is rejected"""
        with pytest.raises(DomainError):
            bessel_zeros(1.0, 0)


class TestRobinEigenvalues:
    """Test roots of 2 J_lambda(x) + x J_lambda'(x)"""

    def test_gravitational_roots_are_zeros_of_j1(self):
        """Test lambda = 2: the roots coincide with the zeros of J_1"""
        roots = np.array(robin_eigenvalues(2.0, 10))
        zeros = np.array(bessel_zeros(1.0, 10))
        assert np.max(np.abs(roots - zeros)) < 1e-10
        assert abs(roots[0] - 3.8317059702075125) < 1e-10

    def test_residuals_are_small(self):
        """Test that g vanishes at every root"""
        roots = np.array(robin_eigenvalues(np.sqrt(1.25), 15))
        assert np.max(np.abs(robin_function(np.sqrt(1.25), roots))) < 1e-11

    def test_roots_are_positive_and_increasing(self):
        """Test ordering for a non-integer index"""
        roots = np.array(robin_eigenvalues(0.7, 8))
        assert roots[0] > 0
        assert np.all(np.diff(roots) > 0)

    def test_order_must_be_positive(self):
        """Test that lambda = 0 is rejected"""
        with pytest.raises(DomainError):
            robin_eigenvalues(0.0, 3)


class TestEigenConditionDiagnostic:
    """Test the comparison with the zeros of J_(lambda - 1)"""

    def test_conditions_agree_for_lambda_two(self):
        """Test that the two sets agree only when lambda = 2"""
        diagnostic = eigen_condition_diagnostic(2.0, 5)
        assert diagnostic.conditions_agree
        assert diagnostic.max_difference < 1e-9
        assert len(diagnostic.robin_roots) == len(diagnostic.bessel_roots) == 5

    def test_conditions_differ_for_lambda_one(self):
        """Test that lambda = 1 gives a visibly different set"""
        diagnostic = eigen_condition_diagnostic(1.0, 3)
        assert not diagnostic.conditions_agree
        assert diagnostic.max_difference > 0.1
