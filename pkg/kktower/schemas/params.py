"""
Pydantic schema for the model parameters

ModelParams is the single home of mu, lambda, alpha_plus/minus and nu.
"""

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ModelParams(BaseModel):
    """Mass parameter of the inverse-square potential and its derived Bessel data"""
    model_config = ConfigDict(frozen=True)

    mu: float = Field(..., gt=-0.25, description="Coefficient of mu / z^2")
    lambda_index: float = Field(..., gt=0, description="Bessel index sqrt(mu + 1/4)")
    alpha_plus: float = Field(..., description="-1/2 + lambda")
    alpha_minus: float = Field(..., description="-1/2 - lambda")
    nu: Optional[int] = Field(None, ge=1, description="Set when mu = (nu^2 - 1) / 4")

    @model_validator(mode="after")
    def check_consistency(self) -> "ModelParams":
        lam = math.sqrt(self.mu + 0.25)
        if abs(self.lambda_index - lam) > 1e-12 * max(1.0, lam):
            raise ValueError(f"lambda_index {self.lambda_index} != sqrt(mu + 1/4) = {lam}")
        if abs(self.alpha_plus - (-0.5 + lam)) > 1e-12 * max(1.0, lam):
            raise ValueError("alpha_plus must equal -1/2 + lambda")
        if abs(self.alpha_minus - (-0.5 - lam)) > 1e-12 * max(1.0, lam):
            raise ValueError("alpha_minus must equal -1/2 - lambda")
        if self.nu is not None and abs(self.lambda_index - self.nu / 2) > 1e-12:
            raise ValueError(f"nu={self.nu} inconsistent with lambda={self.lambda_index}")
        return self

    def alpha(self, branch: Literal["plus", "minus"]) -> float:
        return self.alpha_plus if branch == "plus" else self.alpha_minus

    @property
    def nu_is_even(self) -> bool:
        return self.nu is not None and self.nu % 2 == 0

    @property
    def lift_dimension(self) -> Optional[int]:
        """Dimension N = nu + 2 of the Euclidean space whose radius is z"""
        return None if self.nu is None else self.nu + 2


def nu_from_mu(mu: float, tol: float = 1e-12) -> Optional[int]:
    """Return nu >= 1 when mu = (nu^2 - 1) / 4 within tol, else None"""
    if mu <= -0.25:
        return None
    nu = round(math.sqrt(4.0 * mu + 1.0))
    if nu >= 1 and abs(mu - (nu * nu - 1) / 4.0) <= tol:
        return int(nu)
    return None
