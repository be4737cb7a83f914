"""
Pydantic schemas for quadrature grids and Hankel spectra
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _frozen_array(value, dtype=None) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


class QuadratureGrid(BaseModel):
    """Nodes and positive weights discretising an interval of (0, domain_end]"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    nodes: np.ndarray
    weights: np.ndarray
    domain_end: float = Field(..., gt=0, description="Truncation point")
    domain_start: float = Field(default=0.0, ge=0)
    nodes_per_panel: int = Field(default=1, ge=1, description="Nodes per equal-width panel")
    panel_width: Optional[float] = Field(default=None, gt=0)
    full_interval: bool = Field(default=True, description="Weights cover the whole interval")

    @field_validator("nodes", "weights", mode="before")
    @classmethod
    def as_float_array(cls, v) -> np.ndarray:
        return _frozen_array(v, dtype=float)

    @model_validator(mode="after")
    def check_invariants(self) -> "QuadratureGrid":
        if self.nodes.ndim != 1 or self.nodes.size == 0:
            raise ValueError("nodes must be a non-empty 1-D array")
        if self.weights.shape != self.nodes.shape:
            raise ValueError("weights and nodes differ in length")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if self.nodes[0] <= self.domain_start or self.nodes[-1] > self.domain_end:
            raise ValueError("nodes must lie in (domain_start, domain_end]")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if self.full_interval:
            length = self.domain_end - self.domain_start
            if abs(self.weights.sum() - length) > 1e-12 * length:
                raise ValueError("weights do not sum to the interval length")
        if self.nodes_per_panel > 1 and self.nodes.size % self.nodes_per_panel:
            raise ValueError("node count is not a multiple of nodes_per_panel")
        return self

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def panel_count(self) -> int:
        return self.size // self.nodes_per_panel

    @property
    def mean_spacing(self) -> float:
        return (self.domain_end - self.domain_start) / self.size

    def metadata(self) -> dict:
        return {
            "domain_start": self.domain_start,
            "domain_end": self.domain_end,
            "size": self.size,
            "nodes_per_panel": self.nodes_per_panel,
            "panel_width": self.panel_width,
        }


class HankelSpectrum(BaseModel):
    """Samples of H_lambda u on a mass grid"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    order: float = Field(..., gt=0, description="Bessel order lambda")
    m_grid: np.ndarray
    coeffs: np.ndarray
    m_weights: Optional[np.ndarray] = Field(
        default=None, description="Quadrature weights of m_grid, needed by the inverse"
    )

    @field_validator("m_grid", mode="before")
    @classmethod
    def as_mass_array(cls, v) -> np.ndarray:
        return _frozen_array(v, dtype=float)

    @field_validator("coeffs", mode="before")
    @classmethod
    def as_coeff_array(cls, v) -> np.ndarray:
        return _frozen_array(v, dtype=complex)

    @field_validator("m_weights", mode="before")
    @classmethod
    def as_weight_array(cls, v):
        return None if v is None else _frozen_array(v, dtype=float)

    @model_validator(mode="after")
    def check_invariants(self) -> "HankelSpectrum":
        if self.m_grid.ndim != 1 or self.coeffs.shape != self.m_grid.shape:
            raise ValueError("coeffs must match m_grid")
        if np.any(self.m_grid <= 0) or np.any(np.diff(self.m_grid) <= 0):
            raise ValueError("m_grid must be positive and strictly increasing")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coeffs must be finite")
        if self.m_weights is not None and self.m_weights.shape != self.m_grid.shape:
            raise ValueError("m_weights must match m_grid")
        return self

    def spectral_mass(self) -> float:
        if self.m_weights is None:
            raise ValueError("spectral mass needs m_weights")
        return float(np.sum(self.m_weights * np.abs(self.coeffs) ** 2))
