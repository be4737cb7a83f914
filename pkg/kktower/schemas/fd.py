"""
Pydantic schema for the finite-difference oracle configuration
"""

import math
from typing import List, Literal, Optional

import numpy as np

from pydantic import BaseModel, ConfigDict, Field

from kktower.core.errors import CFLError
from kktower.schemas.fields import FieldState

CFL_LIMIT = 0.9


class FDConfig(BaseModel):
    """Staggered-grid leapfrog parameters"""
    model_config = ConfigDict(frozen=True)

    h_z: float = Field(..., gt=0, description="Spacing in z")
    h_r: Optional[float] = Field(default=None, gt=0, description="Spacing in |x| for radial runs")
    dt: float = Field(..., gt=0)
    steps: int = Field(..., ge=1)
    bc_right: Literal["none", "robin_3_2"] = Field(
        default="none", description="Right end condition: Dirichlet wall or brane Robin"
    )

    @property
    def dimension(self) -> int:
        return 1 if self.h_r is None else 2

    @property
    def courant(self) -> float:
        h_min = self.h_z if self.h_r is None else min(self.h_z, self.h_r)
        return self.dt * math.sqrt(self.dimension) / h_min

    @property
    def t_final(self) -> float:
        return self.dt * self.steps

    def check_cfl(self) -> None:
        if self.courant > CFL_LIMIT:
            raise CFLError(
                f"dt={self.dt} violates CFL: courant {self.courant:.3f} > {CFL_LIMIT}"
            )

    @classmethod
    def for_final_time(
        cls,
        h_z: float,
        t_final: float,
        courant: float = 0.5,
        h_r: Optional[float] = None,
        bc_right: str = "none",
    ) -> "FDConfig":
        h_min = h_z if h_r is None else min(h_z, h_r)
        dim = 1 if h_r is None else 2
        steps = max(1, math.ceil(t_final * math.sqrt(dim) / (courant * h_min) - 1e-9))
        return cls(h_z=h_z, h_r=h_r, dt=t_final / steps, steps=steps, bc_right=bc_right)


class FDRun(BaseModel):
    """Saved states of a leapfrog run with its midpoint energies"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: FDConfig
    states: List[FieldState]
    midpoint_energy: np.ndarray = Field(..., description="Discrete energy at t = (n + 1/2) dt")

    @property
    def final(self) -> FieldState:
        return self.states[-1]

    @property
    def energy_drift(self) -> float:
        e = self.midpoint_energy
        return float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300))
