"""
Pydantic schemas for mode towers

A tower stores, for every transverse wavenumber k and every mass m (or brane
eigenvalue lambda_n), the complex pair (a, b) of
    T(t) = a cos(omega t) + b sin(omega t) / omega,  omega = sqrt(k^2 + m^2).
"""

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import jv

from kktower.schemas.params import ModelParams

TransverseKind = Literal["independent", "radial"]


def _robin_tolerance(root: float) -> float:
    # x J' grows like sqrt(x); the bound follows it past x = 100
    return 1e-11 * max(1.0, root / 100.0)


NORM_CONSTANT_TOLERANCE = 1e-10


def brane_norm_constants(lambda_index: float, roots: np.ndarray) -> np.ndarray:
    """C_n = sign(J(lambda_n)) sqrt(2 lambda_n / ((4 + lambda_n^2 - lambda^2) J(lambda_n)^2))"""
    trace = jv(lambda_index, roots)
    gap = 4.0 + roots**2 - lambda_index**2
    return np.sign(trace) * np.sqrt(2.0 * roots / (gap * trace**2))


class _TowerBase(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k_grid: np.ndarray
    a: np.ndarray
    b: np.ndarray
    transverse: TransverseKind = "independent"
    radial_extent: Optional[float] = Field(
        default=None, gt=0, description="Length L of the sine basis in |x|"
    )
    r_extent: Optional[float] = Field(
        default=None, gt=0, description="Right end of the data grid in |x|"
    )

    @field_validator("k_grid", mode="before")
    @classmethod
    def as_k_array(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float).reshape(-1)
        arr.setflags(write=False)
        return arr

    @field_validator("a", "b", mode="before")
    @classmethod
    def as_coeff_array(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=complex)
        arr.setflags(write=False)
        return arr

    def _check_common(self, mode_count: int) -> None:
        if np.any(self.k_grid < 0):
            raise ValueError("k_grid must be non-negative")
        shape = (self.k_grid.size, mode_count)
        if self.a.shape != shape or self.b.shape != shape:
            raise ValueError(f"coefficient arrays must have shape {shape}")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ValueError("coefficients must be finite")
        if self.transverse == "radial":
            if self.radial_extent is None:
                raise ValueError("radial towers need radial_extent")
            if np.any(self.k_grid <= 0):
                raise ValueError("radial wavenumbers must be positive")
        elif self.k_grid.size != 1:
            raise ValueError("x-independent towers carry a single wavenumber")

    @property
    def is_radial(self) -> bool:
        return self.transverse == "radial"

    @property
    def volume_factor(self) -> float:
        """4 pi for radial fields, 1 per unit transverse volume otherwise"""
        return 4.0 * math.pi if self.is_radial else 1.0


class ContinuousTower(_TowerBase):
    """Half-line tower on a mass quadrature grid"""
    params: ModelParams
    m_grid: np.ndarray
    m_weights: np.ndarray
    z_extent: float = Field(..., gt=0, description="Right end of the data grid in z")
    tail: float = Field(default=0.0, ge=0, description="Parseval defect at decomposition")

    @field_validator("m_grid", "m_weights", mode="before")
    @classmethod
    def as_mass_array(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_invariants(self) -> "ContinuousTower":
        if self.m_grid.ndim != 1 or self.m_weights.shape != self.m_grid.shape:
            raise ValueError("m_grid and m_weights must be matching 1-D arrays")
        if np.any(self.m_grid <= 0) or np.any(np.diff(self.m_grid) <= 0):
            raise ValueError("m_grid must be positive and strictly increasing")
        if np.any(self.m_weights <= 0):
            raise ValueError("m_weights must be positive")
        self._check_common(self.m_grid.size)
        return self

    @property
    def masses(self) -> np.ndarray:
        return self.m_grid

    @property
    def mass_weights(self) -> np.ndarray:
        return self.m_weights

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.k_grid[:, None] ** 2 + self.m_grid[None, :] ** 2)


class BraneSpectrum(BaseModel):
    """Robin eigenvalues on (0, 1] with their normalisation data"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: ModelParams
    eigenvalues: np.ndarray
    norm_constants: np.ndarray
    robin_residuals: np.ndarray

    @field_validator("eigenvalues", "norm_constants", "robin_residuals", mode="before")
    @classmethod
    def as_array(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_invariants(self) -> "BraneSpectrum":
        lam = self.eigenvalues
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("eigenvalues must be a non-empty 1-D array")
        if self.norm_constants.shape != lam.shape or self.robin_residuals.shape != lam.shape:
            raise ValueError("spectrum arrays differ in length")
        if lam[0] <= 0 or np.any(np.diff(lam) <= 0):
            raise ValueError("eigenvalues must be positive and strictly increasing")
        for n, (root, residual) in enumerate(zip(lam, self.robin_residuals), start=1):
            if abs(residual) >= _robin_tolerance(root):
                raise ValueError(f"Robin residual {residual:.3e} too large at n={n}")
        if np.any(self.norm_constants == 0) or not np.all(np.isfinite(self.norm_constants)):
            raise ValueError("norm constants must be finite and non-zero")
        expected = brane_norm_constants(self.params.lambda_index, lam)
        deviation = np.abs(self.norm_constants - expected) / np.abs(expected)
        if np.any(deviation > NORM_CONSTANT_TOLERANCE):
            n = int(np.argmax(deviation)) + 1
            raise ValueError(f"norm constant C_{n} departs from its closed form by {deviation[n - 1]:.3e}")
        return self

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)


class BraneTower(_TowerBase):
    """Discrete tower on the brane interval"""
    spectrum: BraneSpectrum
    tail: float = Field(default=0.0, ge=0, description="Parseval defect at decomposition")

    @model_validator(mode="after")
    def check_invariants(self) -> "BraneTower":
        self._check_common(self.spectrum.count)
        return self

    @property
    def params(self) -> ModelParams:
        return self.spectrum.params

    @property
    def masses(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def mass_weights(self) -> np.ndarray:
        return np.ones_like(self.spectrum.eigenvalues)

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(self.k_grid[:, None] ** 2 + self.spectrum.eigenvalues[None, :] ** 2)
