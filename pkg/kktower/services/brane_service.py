"""
Discrete Kaluza-Klein tower on the brane interval 0 < z <= 1

Dirichlet behaviour at the horizon z = 0 and the Robin condition
d/dz Phi + (3/2) Phi = 0 at z = 1 leave the eigenmodes
    u_n(z) = C_n sqrt(lambda_n z) J_lambda(lambda_n z),
with lambda_n the positive roots of 2 J_lambda(x) + x J_lambda'(x).
"""

import logging
import math
from typing import List, Optional, Union

import numpy as np
from scipy.special import jv, jvp

from kktower.core.config import get_settings
from kktower.core.errors import ConvergenceError, DomainError, TailError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.reports import EnergyBreakdown
from kktower.schemas.towers import BraneSpectrum, BraneTower, brane_norm_constants
from kktower.services import modal_service
from kktower.services.hankel_service import hankel_kernel
from kktower.services.modal_service import ModalSynthesizer, kg_mode_evolve
from kktower.services.quadrature_service import composite_gauss_legendre, data_panel_width
from kktower.services.specfun_service import robin_eigenvalues, robin_function
from kktower.services.transverse_service import radial_extent, sine_transform

logger = logging.getLogger(__name__)

ORTHONORMALITY_TOLERANCE = 1e-8


def _check_index(spectrum: BraneSpectrum, n: int) -> None:
    if not 0 <= n < spectrum.count:
        raise DomainError(f"mode index {n} outside 0..{spectrum.count - 1}")


def _check_points(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0) or np.any(z > 1.0):
        raise DomainError("brane modes live on 0 < z <= 1")
    return z


class BraneService:
    """Spectrum, decomposition and synthesis on the brane interval"""

    @staticmethod
    def data_grid(spectrum: BraneSpectrum, nodes_per_panel: Optional[int] = None) -> QuadratureGrid:
        """(0, 1] resolved for the most oscillatory mode of the spectrum"""
        return composite_gauss_legendre(1.0, data_panel_width(float(spectrum.eigenvalues[-1])), nodes_per_panel)

    @staticmethod
    def mode_table(spectrum: BraneSpectrum) -> modal_service.ModeTable:
        lam = spectrum.params.lambda_index

        def table(z: np.ndarray, weighted: bool) -> np.ndarray:
            kernel = hankel_kernel(lam, spectrum.eigenvalues, z, weighted=weighted)
            return spectrum.norm_constants[:, None] * kernel

        return table

    @staticmethod
    def gram_matrix(spectrum: BraneSpectrum, grid: Optional[QuadratureGrid] = None) -> np.ndarray:
        grid = grid or BraneService.data_grid(spectrum)
        modes = BraneService.mode_table(spectrum)(grid.nodes, False)
        return (modes * grid.weights[None, :]) @ modes.T

    @staticmethod
    def brane_spectrum(params: ModelParams, count: int) -> BraneSpectrum:
        """First `count` eigenvalues with signed normalisation, u_n(1) > 0"""
        lam = params.lambda_index
        roots = np.array(robin_eigenvalues(lam, count))
        gap = 4.0 + roots**2 - lam**2
        if np.any(gap <= 0):
            raise ConvergenceError("normalisation denominator 4 + lambda_n^2 - lambda^2 is not positive")
        norms = brane_norm_constants(lam, roots)
        spectrum = BraneSpectrum(
            params=params,
            eigenvalues=roots,
            norm_constants=norms,
            robin_residuals=robin_function(lam, roots),
        )
        gram = BraneService.gram_matrix(spectrum)
        defect = float(np.max(np.abs(gram - np.eye(count))))
        if defect >= ORTHONORMALITY_TOLERANCE:
            raise ConvergenceError(f"brane modes are not orthonormal: max |G - I| = {defect:.3e}")
        logger.info(
            f"Brane spectrum: lambda={lam:.6g}, {count} modes, "
            f"lambda_0={roots[0]:.10f}, orthonormality defect {defect:.2e}"
        )
        return spectrum

    @staticmethod
    def eval_mode(spectrum: BraneSpectrum, n: int, z: Union[float, np.ndarray]):
        """u_n(z)"""
        _check_index(spectrum, n)
        pts = _check_points(z)
        lam_n = spectrum.eigenvalues[n]
        values = spectrum.norm_constants[n] * np.sqrt(lam_n * pts) * jv(spectrum.params.lambda_index, lam_n * pts)
        return float(values) if values.ndim == 0 else values

    @staticmethod
    def eval_mode_deriv(spectrum: BraneSpectrum, n: int, z: Union[float, np.ndarray]):
        """u_n'(z) from the closed form"""
        _check_index(spectrum, n)
        pts = _check_points(z)
        lam = spectrum.params.lambda_index
        lam_n = spectrum.eigenvalues[n]
        x = lam_n * pts
        values = spectrum.norm_constants[n] * (
            0.5 * np.sqrt(lam_n / pts) * jv(lam, x) + np.sqrt(x) * lam_n * jvp(lam, x)
        )
        return float(values) if values.ndim == 0 else values

    @staticmethod
    def robin_defects(spectrum: BraneSpectrum) -> np.ndarray:
        """u_n'(1) + (3/2) u_n(1) for every mode"""
        return np.array(
            [
                BraneService.eval_mode_deriv(spectrum, n, 1.0) + 1.5 * BraneService.eval_mode(spectrum, n, 1.0)
                for n in range(spectrum.count)
            ]
        )

    @staticmethod
    def brane_decompose(
        state0: FieldState,
        spectrum: BraneSpectrum,
        k_grid: Optional[np.ndarray] = None,
        extent: Optional[float] = None,
        tail_budget: Optional[float] = None,
        enforce_budget: bool = True,
    ) -> BraneTower:
        """Tower of the Cauchy data on (0, 1] against the first spectrum.count modes"""
        if state0.t != 0.0:
            raise DomainError(f"brane_decompose expects data at t = 0, got t = {state0.t}")
        z = state0.z_grid
        if abs(z.domain_end - 1.0) > 1e-12:
            raise DomainError("brane data must live on a grid of (0, 1]")
        budget = tail_budget if tail_budget is not None else get_settings().TAIL_BUDGET
        modes = BraneService.mode_table(spectrum)(z.nodes, False) * z.weights[None, :]

        if state0.is_radial:
            if k_grid is None:
                raise DomainError("radial data need transverse wavenumbers")
            k_grid = np.asarray(k_grid, dtype=float)
            extent = extent or radial_extent(k_grid)
            r = state0.r_grid
            chi0 = r.nodes[:, None] * state0.phi
            chi1 = r.nodes[:, None] * state0.dphi_dt
            a = sine_transform(chi0, r, k_grid, extent) @ modes.T
            b = sine_transform(chi1, r, k_grid, extent) @ modes.T
            cell = r.weights[:, None] * z.weights[None, :]
            mass0 = float(np.sum(cell * np.abs(chi0) ** 2))
            mass1 = float(np.sum(cell * np.abs(chi1) ** 2))
            kind = "radial"
        else:
            k_grid = np.array([state0.transverse_k])
            a = (modes @ state0.phi)[None, :]
            b = (modes @ state0.dphi_dt)[None, :]
            mass0 = float(np.sum(z.weights * np.abs(state0.phi) ** 2))
            mass1 = float(np.sum(z.weights * np.abs(state0.dphi_dt) ** 2))
            kind = "independent"

        tail_a = 0.0 if mass0 <= 0 else max(0.0, 1.0 - float(np.sum(np.abs(a) ** 2)) / mass0)
        tail_b = 0.0 if mass1 <= 0 else max(0.0, 1.0 - float(np.sum(np.abs(b) ** 2)) / mass1)
        tail = max(tail_a, tail_b)
        logger.info(f"Brane decomposition: {k_grid.size}x{spectrum.count} modes, tails=({tail_a:.3e}, {tail_b:.3e})")
        if enforce_budget and tail > budget:
            raise TailError("mode tail beyond n_max exceeds the budget", tail, budget)

        return BraneTower(
            spectrum=spectrum,
            k_grid=k_grid,
            a=a,
            b=b,
            transverse=kind,
            radial_extent=extent if kind == "radial" else None,
            r_extent=state0.r_grid.domain_end if state0.is_radial else None,
            tail=tail,
        )

    @staticmethod
    def choose_mode_count(
        state0: FieldState,
        params: ModelParams,
        budget: float = 1e-8,
        start: int = 8,
        max_count: int = 1024,
        k_grid: Optional[np.ndarray] = None,
    ) -> BraneTower:
        """Double the mode count until the Parseval tail drops below budget"""
        count = start
        while True:
            spectrum = BraneService.brane_spectrum(params, count)
            tower = BraneService.brane_decompose(state0, spectrum, k_grid=k_grid, enforce_budget=False)
            if tower.tail < budget:
                logger.info(f"Mode count {count} meets tail budget {budget:.1e} (tail {tower.tail:.3e})")
                return tower
            if count >= max_count:
                raise TailError(f"no mode count up to {max_count} meets the budget", tower.tail, budget)
            count = min(2 * count, max_count)

    @staticmethod
    def synthesizer(
        tower: BraneTower, z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid] = None
    ) -> ModalSynthesizer:
        if z_grid.domain_end > 1.0 + 1e-12:
            raise DomainError("brane fields live on 0 < z <= 1")
        return ModalSynthesizer(tower, BraneService.mode_table(tower.spectrum), z_grid, r_grid)

    @staticmethod
    def brane_evolve_reconstruct(
        tower: BraneTower, t: float, z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid] = None
    ) -> FieldState:
        return BraneService.synthesizer(tower, z_grid, r_grid).state(t)

    @staticmethod
    def evolve_series(
        tower: BraneTower, times: List[float], z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid] = None
    ) -> List[FieldState]:
        return BraneService.synthesizer(tower, z_grid, r_grid).series(times)

    @staticmethod
    def weighted_field(
        tower: BraneTower,
        t: float,
        z_grid: QuadratureGrid,
        r_grid: Optional[QuadratureGrid] = None,
        weight_exponent: Optional[float] = None,
    ) -> np.ndarray:
        return BraneService.synthesizer(tower, z_grid, r_grid).weighted(t, weight_exponent)

    @staticmethod
    def spectral_energy(tower: BraneTower, t: float) -> EnergyBreakdown:
        """Strong energy: sum of |phi_n'|^2 + (k^2 + lambda_n^2) |phi_n|^2"""
        return modal_service.spectral_energy(tower, t)

    @staticmethod
    def weak_energy(tower: BraneTower, t: float) -> float:
        """Sum of |phi_n|^2 + |phi_n'|^2 / (k^2 + lambda_n^2)"""
        value, velocity = kg_mode_evolve(tower.omega, tower.a, tower.b, t)
        terms = np.abs(value) ** 2 + np.abs(velocity) ** 2 / tower.omega**2
        return float(tower.volume_factor * np.sum(terms))

    @staticmethod
    def target_grids(
        tower: BraneTower,
        t_max: float,
        margin: float = 2.0,
        panel_fraction: float = 1.0,
        nodes_per_panel: Optional[int] = None,
    ):
        lam_max = float(tower.spectrum.eigenvalues[-1])
        z_grid = composite_gauss_legendre(1.0, data_panel_width(lam_max, panel_fraction), nodes_per_panel)
        if not tower.is_radial:
            return z_grid, None
        r_end = min(tower.radial_extent, (tower.r_extent or tower.radial_extent) + abs(t_max) + margin)
        r_grid = composite_gauss_legendre(
            r_end, data_panel_width(float(tower.k_grid[-1]), panel_fraction), nodes_per_panel
        )
        return z_grid, r_grid

    @staticmethod
    def closed_form_gravitational(spectrum: BraneSpectrum, n: int, z) -> np.ndarray:
        """sqrt(2 z) J_2(lambda_n z) / J_2(lambda_n), the lambda = 2 eigenmodes"""
        if abs(spectrum.params.lambda_index - 2.0) > 1e-12:
            raise DomainError("closed form holds only for mu = 15/4")
        lam_n = spectrum.eigenvalues[n]
        pts = _check_points(z)
        return math.sqrt(2.0) * np.sqrt(pts) * jv(2.0, lam_n * pts) / jv(2.0, lam_n)
