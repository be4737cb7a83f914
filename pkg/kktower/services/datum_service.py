"""
Sampling of scenario data onto grids
"""

import logging
from typing import Callable, Optional

import numpy as np

from kktower.core.errors import PreconditionError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.scenario import (
    AnnulusBump,
    CompactBump,
    Datum,
    GaussianBump,
    HankelSelfReciprocal,
    Packet,
    PureMode,
)
from kktower.schemas.towers import BraneSpectrum
from kktower.services.brane_service import BraneService

logger = logging.getLogger(__name__)

# Annulus geometry as fractions of the support radius; the shell width
# leaves ANNULUS_SIGMAS widths to the ball boundary, to z = 0 and to the centre
ANNULUS_CENTER = 0.5
ANNULUS_RADIUS = 0.25
ANNULUS_SIGMAS = 6.0


def _polynomial_bump(s_squared: np.ndarray, power: int) -> np.ndarray:
    return np.where(s_squared < 1.0, np.clip(1.0 - s_squared, 0.0, None) ** power, 0.0)


def _mesh(z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid]):
    z = z_grid.nodes
    if r_grid is None:
        return z, None
    return z[None, :], r_grid.nodes[:, None]


def sample_datum(
    datum: Datum,
    params: ModelParams,
    z_grid: QuadratureGrid,
    r_grid: Optional[QuadratureGrid] = None,
    spectrum: Optional[BraneSpectrum] = None,
    transverse_k: float = 0.0,
) -> FieldState:
    """Cauchy data (Phi_0, Phi_1) of the datum at t = 0"""
    z, r = _mesh(z_grid, r_grid)
    dphi = None

    if isinstance(datum, GaussianBump):
        phi = datum.amplitude * np.exp(-((z - datum.z_center) ** 2) / (2.0 * datum.width**2))
        if r is not None:
            r_width = datum.r_width or datum.width
            phi = phi * np.exp(-(r**2) / (2.0 * r_width**2))
    elif isinstance(datum, CompactBump):
        s2 = ((z - datum.z_center) / datum.half_width) ** 2
        if r is not None:
            s2 = s2 + (r / (datum.r_half_width or datum.half_width)) ** 2
        phi = datum.amplitude * _polynomial_bump(s2, datum.power)
    elif isinstance(datum, AnnulusBump):
        R = datum.radius
        rho = np.abs(z - ANNULUS_CENTER * R) if r is None else np.hypot(r, z - ANNULUS_CENTER * R)
        sigma = ANNULUS_RADIUS * R / ANNULUS_SIGMAS
        phi = datum.amplitude * np.exp(-((rho - ANNULUS_RADIUS * R) ** 2) / (2.0 * sigma**2))
    elif isinstance(datum, HankelSelfReciprocal):
        w = datum.width
        phi = datum.amplitude * (z / w) ** (params.lambda_index + 0.5) * np.exp(-(z**2) / (2.0 * w**2))
        if r is not None:
            phi = phi * np.exp(-(r**2) / (2.0 * (datum.r_width or w) ** 2))
    elif isinstance(datum, PureMode):
        if spectrum is None:
            raise PreconditionError("pure_mode data need a brane spectrum")
        if r is not None:
            raise PreconditionError("pure_mode data are x-independent")
        phi = datum.amplitude * BraneService.eval_mode(spectrum, datum.n, z)
    elif isinstance(datum, Packet):
        if r is not None:
            raise PreconditionError("packet data are x-independent")
        envelope = datum.amplitude * np.exp(-((z - datum.z_center) ** 2) / (2.0 * datum.sigma**2))
        slope = -(z - datum.z_center) / datum.sigma**2 * envelope
        carrier = np.exp(1j * datum.kappa * (z - datum.z_center))
        phi = envelope * carrier
        dphi = (-np.sign(datum.kappa) * slope - 1j * abs(datum.kappa) * envelope) * carrier
    else:
        raise PreconditionError(f"unknown datum {type(datum).__name__}")

    phi = np.broadcast_to(phi, (z_grid.size,) if r_grid is None else (r_grid.size, z_grid.size)).copy()
    if dphi is None:
        dphi = np.zeros_like(phi)
    logger.debug(f"Sampled {datum.kind} on {phi.shape} nodes, max |phi| = {np.max(np.abs(phi)):.3e}")
    return FieldState(t=0.0, z_grid=z_grid, r_grid=r_grid, transverse_k=transverse_k, phi=phi, dphi_dt=dphi)


def state_builder(
    datum: Datum,
    params: ModelParams,
    spectrum: Optional[BraneSpectrum] = None,
    transverse_k: float = 0.0,
) -> Callable[[QuadratureGrid, Optional[QuadratureGrid]], FieldState]:
    """Closure sampling the datum on any pair of grids (used by refinement studies)"""

    def build(z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid] = None) -> FieldState:
        return sample_datum(datum, params, z_grid, r_grid, spectrum, transverse_k)

    return build
