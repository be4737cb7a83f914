"""
Pydantic schemas for energies, fits and verification reports
"""

import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class EnergyBreakdown(BaseModel):
    """Energy split into kinetic, potential and boundary parts"""
    model_config = ConfigDict(frozen=True)

    kinetic: float = Field(..., ge=0)
    potential_transverse: float = Field(..., ge=0)
    potential_z: float = Field(..., ge=0)
    boundary: float = Field(default=0.0, ge=0, description="Brane trace term, zero on the half-line")
    total: float = Field(..., ge=0)

    @model_validator(mode="after")
    def check_total(self) -> "EnergyBreakdown":
        parts = self.kinetic + self.potential_transverse + self.potential_z + self.boundary
        if abs(self.total - parts) > 1e-12 * max(parts, 1e-300):
            raise ValueError(f"total {self.total} != sum of components {parts}")
        return self

    @classmethod
    def from_parts(
        cls, kinetic: float, potential_transverse: float, potential_z: float, boundary: float = 0.0
    ) -> "EnergyBreakdown":
        parts = [max(0.0, float(p)) for p in (kinetic, potential_transverse, potential_z, boundary)]
        return cls(
            kinetic=parts[0],
            potential_transverse=parts[1],
            potential_z=parts[2],
            boundary=parts[3],
            total=sum(parts),
        )

    @property
    def potential(self) -> float:
        return self.potential_transverse + self.potential_z + self.boundary


class DecayFit(BaseModel):
    """Least-squares fit of log value against log t inside a window"""
    model_config = ConfigDict(frozen=True)

    times: List[float]
    values: List[float]
    exponent: float
    exponent_stderr: float = Field(..., ge=0)
    intercept: float
    r_squared: float = Field(..., ge=0, le=1)
    window: Tuple[float, float]

    @property
    def points(self) -> int:
        return len(self.times)


class VerificationReport(BaseModel):
    """Outcome of a single check"""
    check_name: str = Field(..., min_length=1)
    passed: bool
    measured: Dict[str, float] = Field(default_factory=dict)
    tolerance: float = Field(..., ge=0)
    notes: str = ""
    negative_control: bool = Field(default=False, description="Check is expected to fail")
    informational: bool = Field(default=False, description="Outcome does not gate the exit code")
    provenance: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("measured")
    @classmethod
    def measured_must_be_finite(cls, v: Dict[str, float]) -> Dict[str, float]:
        for key, value in v.items():
            if not math.isfinite(value):
                raise ValueError(f"measured value {key} is not finite")
        return v

    @property
    def outcome_ok(self) -> bool:
        """True when the result is what the check was designed to produce"""
        if self.informational:
            return True
        return self.passed != self.negative_control


class EigenConditionDiagnostic(BaseModel):
    """Robin-derived roots against the zeros of J_(lambda - 1)"""
    order: float = Field(..., gt=0)
    robin_roots: List[float]
    bessel_roots: List[float]
    max_difference: float = Field(..., ge=0)
    conditions_agree: bool


class PacketTrajectory(BaseModel):
    """Peak location of |phi| over time"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: np.ndarray
    peaks: np.ndarray
    amplitudes: np.ndarray
    v_in: float
    v_out: float
    bounce_time: Optional[float] = None

    @model_validator(mode="after")
    def check_lengths(self) -> "PacketTrajectory":
        if not (self.times.shape == self.peaks.shape == self.amplitudes.shape):
            raise ValueError("trajectory arrays differ in length")
        return self
