"""
Continuous Kaluza-Klein tower on the half-line z > 0

Every mass m > 0 carries a 4D Klein-Gordon field phi_m(t, x), obtained from
the data by the Hankel transform of order lambda in z.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from kktower.core.config import get_settings
from kktower.core.errors import DomainError, TailError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams, nu_from_mu
from kktower.schemas.reports import EnergyBreakdown
from kktower.schemas.towers import ContinuousTower
from kktower.services import modal_service
from kktower.services.hankel_service import hankel_kernel
from kktower.services.modal_service import ModalSynthesizer, kg_mode_evolve
from kktower.services.quadrature_service import composite_gauss_legendre, data_panel_width
from kktower.services.transverse_service import radial_extent, sine_transform

logger = logging.getLogger(__name__)

__all__ = ["HalfLineService", "kg_mode_evolve", "make_params", "mass_from_cosmological"]


def make_params(mu: float) -> ModelParams:
    """Derived Bessel data of the mass parameter mu"""
    if not (math.isfinite(mu) and mu > -0.25):
        raise DomainError(f"mu = {mu} violates -1/4 < mu")
    lam = math.sqrt(mu + 0.25)
    nu = nu_from_mu(mu)
    if nu is not None:
        lam = nu / 2.0
    return ModelParams(mu=mu, lambda_index=lam, alpha_plus=-0.5 + lam, alpha_minus=-0.5 - lam, nu=nu)


def mass_from_cosmological(lambda_kg: float) -> ModelParams:
    """Parameters for the field z^(-3/2) u with mass shift lambda_kg, mu = 15/4 + lambda_kg"""
    if not lambda_kg > -4.0:
        raise DomainError(f"lambda = {lambda_kg} gives mu <= -1/4; need lambda > -4")
    return make_params(3.75 + lambda_kg)


def _parseval_defect(field_mass: float, spectral_mass: float) -> float:
    if field_mass <= 0.0:
        return 0.0
    return max(0.0, 1.0 - spectral_mass / field_mass)


class HalfLineService:
    """Decomposition, evolution and synthesis of half-line towers"""

    @staticmethod
    def mode_table(params: ModelParams, m_grid: np.ndarray) -> modal_service.ModeTable:
        def table(z: np.ndarray, weighted: bool) -> np.ndarray:
            return hankel_kernel(params.lambda_index, m_grid, z, weighted=weighted)

        return table

    @staticmethod
    def decompose(
        state0: FieldState,
        params: ModelParams,
        m_grid: QuadratureGrid,
        k_grid: Optional[np.ndarray] = None,
        extent: Optional[float] = None,
        tail_budget: Optional[float] = None,
    ) -> ContinuousTower:
        """Tower of the Cauchy data state0 on the mass grid m_grid

        Radial data are expanded in the sine basis with wavenumbers k_grid on
        [0, extent]; x-independent data keep their single plane wave.
        """
        if state0.t != 0.0:
            raise DomainError(f"decompose expects data at t = 0, got t = {state0.t}")
        budget = tail_budget if tail_budget is not None else get_settings().TAIL_BUDGET
        z = state0.z_grid
        kernel = hankel_kernel(params.lambda_index, m_grid.nodes, z.nodes) * z.weights[None, :]

        if state0.is_radial:
            if k_grid is None:
                raise DomainError("radial data need transverse wavenumbers")
            k_grid = np.asarray(k_grid, dtype=float)
            extent = extent or radial_extent(k_grid)
            r = state0.r_grid
            edge = np.max(np.abs(state0.phi[-1, :]))
            if edge > 1e-8 * max(np.max(np.abs(state0.phi)), 1e-300):
                raise DomainError(f"data do not vanish at the last r node (|phi| = {edge:.3e})")
            if r.domain_end > extent + 1e-12:
                raise DomainError(f"r grid end {r.domain_end} exceeds the basis length {extent}")
            chi0 = r.nodes[:, None] * state0.phi
            chi1 = r.nodes[:, None] * state0.dphi_dt
            a = sine_transform(chi0, r, k_grid, extent) @ kernel.T
            b = sine_transform(chi1, r, k_grid, extent) @ kernel.T
            cell = r.weights[:, None] * z.weights[None, :]
            mass0 = float(np.sum(cell * np.abs(chi0) ** 2))
            mass1 = float(np.sum(cell * np.abs(chi1) ** 2))
            transverse_kind = "radial"
        else:
            if k_grid is not None and (np.size(k_grid) != 1 or float(np.ravel(k_grid)[0]) != state0.transverse_k):
                raise DomainError("x-independent data carry exactly their own wavenumber")
            k_grid = np.array([state0.transverse_k])
            a = (kernel @ state0.phi)[None, :]
            b = (kernel @ state0.dphi_dt)[None, :]
            mass0 = float(np.sum(z.weights * np.abs(state0.phi) ** 2))
            mass1 = float(np.sum(z.weights * np.abs(state0.dphi_dt) ** 2))
            transverse_kind = "independent"

        tail_a = _parseval_defect(mass0, float(np.sum(m_grid.weights * np.abs(a) ** 2)))
        tail_b = _parseval_defect(mass1, float(np.sum(m_grid.weights * np.abs(b) ** 2)))
        tail = max(tail_a, tail_b)
        logger.info(
            f"Half-line decomposition: lambda={params.lambda_index:.6g}, "
            f"{k_grid.size}x{m_grid.size} modes, tails=({tail_a:.3e}, {tail_b:.3e})"
        )
        if tail > budget:
            raise TailError("spectral tail beyond m_max exceeds the budget", tail, budget)

        return ContinuousTower(
            params=params,
            k_grid=k_grid,
            m_grid=m_grid.nodes,
            m_weights=m_grid.weights,
            a=a,
            b=b,
            transverse=transverse_kind,
            radial_extent=extent if transverse_kind == "radial" else None,
            r_extent=state0.r_grid.domain_end if state0.is_radial else None,
            z_extent=z.domain_end,
            tail=tail,
        )

    @staticmethod
    def synthesizer(
        tower: ContinuousTower, z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid] = None
    ) -> ModalSynthesizer:
        return ModalSynthesizer(tower, HalfLineService.mode_table(tower.params, tower.m_grid), z_grid, r_grid)

    @staticmethod
    def reconstruct(
        tower: ContinuousTower, t: float, z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid] = None
    ) -> FieldState:
        """Field at time t on the target grids"""
        return HalfLineService.synthesizer(tower, z_grid, r_grid).state(t)

    @staticmethod
    def evolve_series(
        tower: ContinuousTower,
        times: List[float],
        z_grid: QuadratureGrid,
        r_grid: Optional[QuadratureGrid] = None,
    ) -> List[FieldState]:
        return HalfLineService.synthesizer(tower, z_grid, r_grid).series(times)

    @staticmethod
    def weighted_field(
        tower: ContinuousTower,
        t: float,
        z_grid: QuadratureGrid,
        r_grid: Optional[QuadratureGrid] = None,
        weight_exponent: Optional[float] = None,
    ) -> np.ndarray:
        """z^w Phi(t) with w = -lambda - 1/2 unless given"""
        return HalfLineService.synthesizer(tower, z_grid, r_grid).weighted(t, weight_exponent)

    @staticmethod
    def spectral_energy(tower: ContinuousTower, t: float) -> EnergyBreakdown:
        return modal_service.spectral_energy(tower, t)

    @staticmethod
    def spectral_tail(tower: ContinuousTower, state0: FieldState) -> Tuple[float, float]:
        """Parseval defects of (Phi_0, Phi_1) against the tower"""
        weights = tower.m_weights[None, :]
        spec0 = float(np.sum(weights * np.abs(tower.a) ** 2))
        spec1 = float(np.sum(weights * np.abs(tower.b) ** 2))
        z = state0.z_grid
        if state0.is_radial:
            cell = state0.r_grid.weights[:, None] * z.weights[None, :]
            r2 = state0.r_grid.nodes[:, None] ** 2
            mass0 = float(np.sum(cell * r2 * np.abs(state0.phi) ** 2))
            mass1 = float(np.sum(cell * r2 * np.abs(state0.dphi_dt) ** 2))
        else:
            mass0 = float(np.sum(z.weights * np.abs(state0.phi) ** 2))
            mass1 = float(np.sum(z.weights * np.abs(state0.dphi_dt) ** 2))
        return _parseval_defect(mass0, spec0), _parseval_defect(mass1, spec1)

    @staticmethod
    def scaled(tower: ContinuousTower, factor: complex) -> ContinuousTower:
        return modal_service.scaled(tower, factor)

    @staticmethod
    def target_grids(
        tower: ContinuousTower,
        t_max: float,
        margin: float = 2.0,
        panel_fraction: float = 1.0,
        nodes_per_panel: Optional[int] = None,
    ) -> Tuple[QuadratureGrid, Optional[QuadratureGrid]]:
        """Grids covering everything the data can reach by |t| <= t_max"""
        reach = abs(t_max) + margin
        z_grid = composite_gauss_legendre(
            tower.z_extent + reach, data_panel_width(float(tower.m_grid[-1]), panel_fraction), nodes_per_panel
        )
        if not tower.is_radial:
            return z_grid, None
        r_end = min(tower.radial_extent, (tower.r_extent or tower.radial_extent) + reach)
        r_grid = composite_gauss_legendre(
            r_end, data_panel_width(float(tower.k_grid[-1]), panel_fraction), nodes_per_panel
        )
        return z_grid, r_grid
