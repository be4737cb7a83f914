"""
Per-mode oscillator evolution and synthesis of towers on target grids

Shared by the half-line and brane towers: both store (a, b) over
(k, mode) pairs and differ only in the z-profile of each mode.
"""

import logging
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from kktower.core.errors import DomainError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.reports import EnergyBreakdown
from kktower.schemas.towers import BraneTower, ContinuousTower
from kktower.services.transverse_service import sine_synthesis

logger = logging.getLogger(__name__)

Tower = Union[ContinuousTower, BraneTower]
ModeTable = Callable[[np.ndarray, bool], np.ndarray]


def kg_mode_evolve(omega, a, b, t) -> Tuple[np.ndarray, np.ndarray]:
    """Value and velocity of T'' + omega^2 T = 0 with T(0) = a, T'(0) = b"""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("omega must be non-negative")
    phase = omega * t
    c, s = np.cos(phase), np.sin(phase)
    safe = np.where(omega > 0, omega, 1.0)
    sinc = np.where(omega > 0, s / safe, t)
    value = c * a + sinc * b
    velocity = -omega * s * a + c * b
    if np.ndim(value) == 0:
        return complex(value), complex(velocity)
    return value, velocity


def spectral_energy(tower: Tower, t: float) -> EnergyBreakdown:
    """Discrete Parseval energy of the tower at time t"""
    value, velocity = kg_mode_evolve(tower.omega, tower.a, tower.b, t)
    w = tower.mass_weights[None, :] * tower.volume_factor
    k2 = tower.k_grid[:, None] ** 2
    m2 = tower.masses[None, :] ** 2
    amp = np.abs(value) ** 2
    return EnergyBreakdown.from_parts(
        kinetic=float(np.sum(w * np.abs(velocity) ** 2)),
        potential_transverse=float(np.sum(w * k2 * amp)),
        potential_z=float(np.sum(w * m2 * amp)),
    )


def scaled(tower: Tower, factor: complex) -> Tower:
    """The tower of the data multiplied by factor"""
    return tower.model_copy(update={"a": tower.a * factor, "b": tower.b * factor})


class ModalSynthesizer:
    """Evaluates a tower on fixed z (and r) grids at arbitrary times

    mode_table(z, weighted) returns the (modes, len(z)) matrix of mode
    profiles; weighted=True must return z^(-lambda - 1/2) times the profiles.
    """

    def __init__(
        self,
        tower: Tower,
        mode_table: ModeTable,
        z_grid: QuadratureGrid,
        r_grid: Optional[QuadratureGrid] = None,
    ):
        if tower.is_radial and r_grid is None:
            raise DomainError("radial towers need an r grid")
        if not tower.is_radial and r_grid is not None:
            raise DomainError("x-independent towers take no r grid")
        if tower.is_radial and r_grid.domain_end > tower.radial_extent + 1e-12:
            raise DomainError("target r grid reaches beyond the sine basis")
        self.tower = tower
        self.z_grid = z_grid
        self.r_grid = r_grid
        self._mode_table = mode_table
        self._tables = {}
        self._real = not (np.any(tower.a.imag != 0) or np.any(tower.b.imag != 0))

    def _table(self, weighted: bool) -> np.ndarray:
        if weighted not in self._tables:
            table = self._mode_table(self.z_grid.nodes, weighted)
            self._tables[weighted] = table * self.tower.mass_weights[:, None]
        return self._tables[weighted]

    def _synthesize(self, coeffs: np.ndarray, weighted: bool) -> np.ndarray:
        chi = coeffs @ self._table(weighted)
        if self.tower.is_radial:
            r = self.r_grid.nodes
            out = sine_synthesis(chi, r, self.tower.k_grid, self.tower.radial_extent) / r[:, None]
        else:
            out = chi[0]
        return out.real if self._real else out

    def state(self, t: float) -> FieldState:
        value, velocity = kg_mode_evolve(self.tower.omega, self.tower.a, self.tower.b, t)
        return FieldState(
            t=t,
            z_grid=self.z_grid,
            r_grid=self.r_grid,
            transverse_k=0.0 if self.tower.is_radial else float(self.tower.k_grid[0]),
            phi=self._synthesize(value, weighted=False),
            dphi_dt=self._synthesize(velocity, weighted=False),
        )

    def weighted(self, t: float, exponent: Optional[float] = None) -> np.ndarray:
        """z^exponent Phi(t); the default exponent -lambda - 1/2 uses the smooth profiles"""
        lam = self.tower.params.lambda_index
        value, _ = kg_mode_evolve(self.tower.omega, self.tower.a, self.tower.b, t)
        if exponent is None or abs(exponent + lam + 0.5) < 1e-14:
            return self._synthesize(value, weighted=True)
        return self.z_grid.nodes ** exponent * self._synthesize(value, weighted=False)

    def series(self, times: List[float]) -> List[FieldState]:
        states = [self.state(t) for t in times]
        logger.debug(f"Synthesised {len(states)} states on {self.z_grid.size} z-nodes")
        return states
