"""
Pydantic schemas for parameters, grids, fields, towers and reports
"""

from kktower.schemas.fd import FDConfig, FDRun
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import HankelSpectrum, QuadratureGrid
from kktower.schemas.params import ModelParams, nu_from_mu
from kktower.schemas.reports import (
    DecayFit,
    EigenConditionDiagnostic,
    EnergyBreakdown,
    PacketTrajectory,
    VerificationReport,
)
from kktower.schemas.scenario import CheckSpec, Scenario
from kktower.schemas.towers import BraneSpectrum, BraneTower, ContinuousTower

__all__ = [
    "BraneSpectrum",
    "BraneTower",
    "CheckSpec",
    "ContinuousTower",
    "DecayFit",
    "EigenConditionDiagnostic",
    "EnergyBreakdown",
    "FDConfig",
    "FDRun",
    "FieldState",
    "HankelSpectrum",
    "ModelParams",
    "PacketTrajectory",
    "QuadratureGrid",
    "Scenario",
    "VerificationReport",
    "nu_from_mu",
]
