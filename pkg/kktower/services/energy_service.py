"""
Grid-side energies of field snapshots

The z-part of the energy is taken in the alpha-form
    int |d/dz Phi + (alpha / z) Phi|^2 dz,
which equals int |d/dz Phi|^2 + mu / z^2 |Phi|^2 dz for fields vanishing
like z^(lambda + 1/2) at the horizon. Radial states are evaluated through
chi = r Phi with the 3D volume factor 4 pi.
"""

import logging
import math
from typing import Literal, Optional

import numpy as np

from kktower.core.config import get_settings
from kktower.core.errors import DomainError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.reports import EnergyBreakdown
from kktower.services.quadrature_service import differentiate, trace_at_end

logger = logging.getLogger(__name__)

AlphaBranch = Literal["plus", "minus"]


def alpha_derivative(values: np.ndarray, z_grid: QuadratureGrid, alpha: float) -> np.ndarray:
    """d/dz Phi + (alpha / z) Phi along the last axis, as z^(-alpha) d/dz (z^alpha Phi)"""
    z = z_grid.nodes
    return differentiate(z_grid, values * z**alpha, axis=-1) * z ** (-alpha)


def _volume_terms(state: FieldState, params: ModelParams, alpha: float):
    """Integrated kinetic, transverse and alpha-form densities plus the chi-field"""
    z = state.z_grid
    if state.is_radial:
        r = state.r_grid
        chi = r.nodes[:, None] * state.phi
        chi_t = r.nodes[:, None] * state.dphi_dt
        chi_r = differentiate(r, chi, axis=0)
        chi_z = alpha_derivative(chi, z, alpha)
        cell = 4.0 * math.pi * r.weights[:, None] * z.weights[None, :]
        kinetic = float(np.sum(cell * np.abs(chi_t) ** 2))
        transverse = float(np.sum(cell * np.abs(chi_r) ** 2))
        potential_z = float(np.sum(cell * np.abs(chi_z) ** 2))
        return kinetic, transverse, potential_z, chi
    w = z.weights
    kinetic = float(np.sum(w * np.abs(state.dphi_dt) ** 2))
    transverse = state.transverse_k**2 * float(np.sum(w * np.abs(state.phi) ** 2))
    potential_z = float(np.sum(w * np.abs(alpha_derivative(state.phi, z, alpha)) ** 2))
    return kinetic, transverse, potential_z, state.phi


def energy(state: FieldState, params: ModelParams, alpha_branch: Optional[AlphaBranch] = None) -> EnergyBreakdown:
    """Half-line energy of a snapshot"""
    branch = alpha_branch or get_settings().ENERGY_ALPHA_BRANCH
    kinetic, transverse, potential_z, _ = _volume_terms(state, params, params.alpha(branch))
    return EnergyBreakdown.from_parts(kinetic, transverse, potential_z)


def brane_energy(
    state: FieldState, params: ModelParams, alpha_branch: Optional[AlphaBranch] = None
) -> EnergyBreakdown:
    """Brane energy: volume terms plus the squared trace at z = 1

    Integrating the alpha-form by parts leaves (3/2 - alpha) |Phi(1)|^2 as
    the boundary part. When that weight is negative (alpha_plus with
    lambda > 2) the alpha trace is moved back into the volume term and the
    boundary part is (3/2) |Phi(1)|^2.
    """
    z = state.z_grid
    if abs(z.domain_end - 1.0) > 1e-12:
        raise DomainError("brane energy needs a z grid ending at 1")
    branch = alpha_branch or get_settings().ENERGY_ALPHA_BRANCH
    alpha = params.alpha(branch)
    kinetic, transverse, potential_z, chi = _volume_terms(state, params, alpha)

    trace = trace_at_end(z, chi, axis=-1)
    if state.is_radial:
        trace_mass = 4.0 * math.pi * float(np.sum(state.r_grid.weights * np.abs(trace) ** 2))
    else:
        trace_mass = float(np.abs(trace) ** 2)

    weight = 1.5 - alpha
    if weight < 0:
        potential_z -= alpha * trace_mass
        weight = 1.5
    return EnergyBreakdown.from_parts(kinetic, transverse, potential_z, weight * trace_mass)
