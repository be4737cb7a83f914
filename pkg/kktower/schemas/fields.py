"""
Pydantic schema for a field snapshot on quadrature grids
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kktower.schemas.grids import QuadratureGrid


def _field_array(value) -> np.ndarray:
    arr = np.asarray(value)
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    return arr


class FieldState(BaseModel):
    """Cauchy data (phi, dphi/dt) at time t

    Without r_grid the field is x-independent up to the plane wave
    e^{i transverse_k . x}; with r_grid it is radial in x and arrays are
    shaped (len(r_grid), len(z_grid)).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: float = Field(default=0.0, description="Time of the snapshot")
    z_grid: QuadratureGrid
    r_grid: Optional[QuadratureGrid] = None
    transverse_k: float = Field(default=0.0, ge=0, description="|k| of the transverse plane wave")
    phi: np.ndarray
    dphi_dt: np.ndarray

    @field_validator("phi", "dphi_dt", mode="before")
    @classmethod
    def as_field_array(cls, v) -> np.ndarray:
        return _field_array(v)

    @model_validator(mode="after")
    def check_shapes(self) -> "FieldState":
        expected = (self.z_grid.size,) if self.r_grid is None else (self.r_grid.size, self.z_grid.size)
        if self.phi.shape != expected or self.dphi_dt.shape != expected:
            raise ValueError(f"field arrays must have shape {expected}")
        if self.r_grid is not None and self.transverse_k != 0.0:
            raise ValueError("radial states carry no transverse plane wave")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.dphi_dt))):
            raise ValueError("field arrays must be finite")
        return self

    @property
    def is_radial(self) -> bool:
        return self.r_grid is not None

    def at_time(self, t: float) -> "FieldState":
        return self.model_copy(update={"t": float(t)})

    def scaled(self, factor: complex) -> "FieldState":
        return self.model_copy(update={"phi": self.phi * factor, "dphi_dt": self.dphi_dt * factor})
