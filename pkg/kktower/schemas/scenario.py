"""
Pydantic schemas for scenario files

A scenario names the geometry, the mass, the initial datum, the grids and the
checks to run. Unknown keys are rejected at every level.
"""

import math
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Annotated

from kktower.schemas.params import nu_from_mu

CheckName = Literal[
    "hankel_roundtrip",
    "brane_spectrum",
    "conservation",
    "finite_speed",
    "lacuna",
    "equipartition",
    "decay",
    "strichartz",
    "packet",
    "lift_residual",
    "oracle",
    "convergence",
]

NU_CHECKS = {"lacuna", "equipartition", "strichartz", "packet", "lift_residual"}
EVEN_NU_CHECKS = {"lacuna", "equipartition"}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GaussianBump(_Strict):
    """exp(-(z - z_center)^2 / (2 width^2)), optionally times a Gaussian in |x|"""
    kind: Literal["gaussian_bump"]
    z_center: float = Field(..., gt=0)
    width: float = Field(..., gt=0)
    amplitude: float = 1.0
    r_width: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def away_from_horizon(self) -> "GaussianBump":
        if self.z_center < 8.0 * self.width:
            raise ValueError("z_center must be at least 8 widths from z = 0")
        return self

    @property
    def support_radius(self) -> float:
        return self.z_center + 8.0 * self.width


class CompactBump(_Strict):
    """(1 - s^2)^power on |s| < 1 with s the scaled distance from (0, z_center)"""
    kind: Literal["compact_bump"]
    z_center: float = Field(..., gt=0)
    half_width: float = Field(..., gt=0)
    power: int = Field(default=8, ge=2)
    amplitude: float = 1.0
    r_half_width: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def inside_half_line(self) -> "CompactBump":
        if self.z_center <= self.half_width:
            raise ValueError("compact_bump must vanish near z = 0")
        return self

    @property
    def support_radius(self) -> float:
        return self.z_center + self.half_width


class AnnulusBump(_Strict):
    """Gaussian shell inside the ball of radius R about the origin, six widths clear of its boundary and of z = 0"""
    kind: Literal["annulus_bump"]
    radius: float = Field(..., gt=0)
    amplitude: float = 1.0

    @property
    def support_radius(self) -> float:
        return self.radius


class HankelSelfReciprocal(_Strict):
    """z^(lambda + 1/2) exp(-z^2 / (2 w^2)), its own Hankel transform at w = 1

    With the radial factor of the same width it is the trace of a Gaussian in
    the lifted variables, so its low masses are never degenerate.
    """
    kind: Literal["hankel_self_reciprocal"]
    amplitude: float = 1.0
    width: float = Field(default=1.0, gt=0)
    r_width: Optional[float] = Field(default=None, gt=0)

    @property
    def support_radius(self) -> float:
        return 9.0 * self.width


class PureMode(_Strict):
    """A single brane eigenmode u_n, counted from n = 0"""
    kind: Literal["pure_mode"]
    n: int = Field(..., ge=0)
    amplitude: float = 1.0

    @property
    def support_radius(self) -> float:
        return 1.0


class Packet(_Strict):
    """Gaussian envelope with carrier e^(i kappa z), moving with the sign of kappa"""
    kind: Literal["packet"]
    z_center: float = Field(..., gt=0)
    kappa: float
    sigma: float = Field(..., gt=0)
    amplitude: float = 1.0

    @model_validator(mode="after")
    def check_packet(self) -> "Packet":
        if self.kappa == 0:
            raise ValueError("kappa must be non-zero")
        if self.z_center < 8.0 * self.sigma:
            raise ValueError("z_center must be at least 8 sigma from z = 0")
        return self

    @property
    def support_radius(self) -> float:
        return self.z_center + 8.0 * self.sigma


Datum = Annotated[
    Union[GaussianBump, CompactBump, AnnulusBump, HankelSelfReciprocal, PureMode, Packet],
    Field(discriminator="kind"),
]


class IndependentTransverse(_Strict):
    kind: Literal["independent"] = "independent"
    k: float = Field(default=0.0, ge=0)


class RadialTransverse(_Strict):
    """Radial sine basis k_n = n k_max / k_count on [0, L], L = pi k_count / k_max"""
    kind: Literal["radial"]
    k_count: int = Field(..., ge=1)
    k_max: float = Field(..., gt=0)
    r_data: float = Field(..., gt=0, description="Right end of the data grid in |x|")

    @property
    def extent(self) -> float:
        return math.pi * self.k_count / self.k_max


Transverse = Annotated[Union[IndependentTransverse, RadialTransverse], Field(discriminator="kind")]


class GridSpec(_Strict):
    z_data: Optional[float] = Field(default=None, gt=0, description="Data grid end, default from datum")
    m_max: float = Field(default=12.0, gt=0)
    nodes_per_panel: Optional[int] = Field(default=None, ge=2)
    tail_budget: Optional[float] = Field(default=None, gt=0, lt=1)
    target_margin: float = Field(default=2.0, ge=0)
    data_panel_fraction: float = Field(default=0.25, gt=0, le=4)
    target_panel_fraction: float = Field(default=1.0, gt=0, le=4)
    mode_count: Optional[int] = Field(default=None, ge=1)
    mode_budget: Optional[float] = Field(default=None, gt=0, lt=1)
    fd_h: float = Field(default=0.01, gt=0)
    fd_courant: float = Field(default=0.5, gt=0, le=0.9)


class CheckSpec(_Strict):
    name: CheckName
    tolerance: Optional[float] = Field(default=None, ge=0)
    negative_control: bool = False
    informational: bool = False
    options: Dict[str, Any] = Field(default_factory=dict)

    @property
    def enforces_hypothesis(self) -> bool:
        return bool(self.options.get("enforce_hypothesis", not self.negative_control))


class Scenario(_Strict):
    """A complete run description"""
    name: str = Field(..., min_length=1)
    description: str = ""
    geometry: Literal["halfline", "brane"]
    mu: Optional[float] = None
    lambda_cosmological: Optional[float] = Field(
        default=None, description="Mass shift lambda of the original field, mu = 15/4 + lambda"
    )
    alpha_branch: Literal["plus", "minus"] = "minus"
    datum: Datum
    transverse: Transverse = Field(default_factory=IndependentTransverse)
    grids: GridSpec = Field(default_factory=GridSpec)
    times: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    checks: List[CheckSpec] = Field(default_factory=list)
    seed: Optional[int] = None

    @field_validator("mu")
    @classmethod
    def mu_above_bound(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not (math.isfinite(v) and v > -0.25):
            raise ValueError(f"mu = {v} violates -1/4 < mu")
        return v

    @model_validator(mode="after")
    def check_scenario(self) -> "Scenario":
        if (self.mu is None) == (self.lambda_cosmological is None):
            raise ValueError("give exactly one of mu and lambda_cosmological")
        if not self.effective_mu > -0.25:
            raise ValueError(f"mu = {self.effective_mu} violates -1/4 < mu")
        if any(not math.isfinite(t) for t in self.times):
            raise ValueError("times must be finite")
        if isinstance(self.datum, PureMode) and self.geometry != "brane":
            raise ValueError("pure_mode data exist only on the brane")
        if isinstance(self.datum, Packet) and self.transverse.kind != "independent":
            raise ValueError("packet data are x-independent")
        if self.geometry == "brane" and self.datum.support_radius > 1.0:
            raise ValueError("brane data must be supported in (0, 1]")
        nu = nu_from_mu(self.effective_mu)
        for check in self.checks:
            if check.name not in NU_CHECKS or not check.enforces_hypothesis:
                continue
            if nu is None:
                raise ValueError(f"check {check.name} needs mu = (nu^2 - 1) / 4")
            if check.name in EVEN_NU_CHECKS and nu % 2:
                raise ValueError(f"check {check.name} needs nu even, got nu={nu}")
        return self

    @property
    def effective_mu(self) -> float:
        if self.mu is not None:
            return self.mu
        return 3.75 + self.lambda_cosmological

    @property
    def t_max(self) -> float:
        return max(abs(t) for t in self.times)
