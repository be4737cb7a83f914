"""
Composite Gauss-Legendre grids and per-panel spectral operators
"""

import logging
import math
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import legendre

from kktower.core.config import get_settings
from kktower.core.errors import DomainError, ShapeError
from kktower.schemas.grids import QuadratureGrid

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _reference_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return legendre.leggauss(n)


@lru_cache(maxsize=None)
def _reference_operators(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Differentiation matrix and end-point rows on the reference panel [-1, 1]"""
    x, w = _reference_rule(n)
    vander = legendre.legvander(x, n - 1)
    # V^-1 = diag((2k+1)/2) V^T W by discrete orthogonality of P_k at GL nodes
    inverse = ((2.0 * np.arange(n) + 1.0) / 2.0)[:, None] * vander.T * w[None, :]
    dvander = np.empty_like(vander)
    for k in range(n):
        coeffs = np.zeros(n)
        coeffs[k] = 1.0
        dvander[:, k] = legendre.legval(x, legendre.legder(coeffs))
    diff = dvander @ inverse
    right = np.ones(n) @ inverse
    left = ((-1.0) ** np.arange(n)) @ inverse
    return diff, right, left


def composite_gauss_legendre(
    domain_end: float,
    panel_width: float,
    nodes_per_panel: Optional[int] = None,
    domain_start: float = 0.0,
) -> QuadratureGrid:
    """Equal-width panels, each carrying an n-point Gauss-Legendre rule"""
    if not (domain_end > domain_start >= 0):
        raise DomainError(f"invalid interval ({domain_start}, {domain_end}]")
    if panel_width <= 0:
        raise DomainError("panel_width must be positive")
    n = nodes_per_panel or get_settings().NODES_PER_PANEL
    length = domain_end - domain_start
    panels = max(1, math.ceil(length / panel_width - 1e-12))
    width = length / panels
    x, w = _reference_rule(n)
    starts = domain_start + width * np.arange(panels)
    nodes = (starts[:, None] + width * (x[None, :] + 1.0) / 2.0).ravel()
    weights = np.tile(w * width / 2.0, panels)
    return QuadratureGrid(
        nodes=nodes,
        weights=weights,
        domain_end=domain_end,
        domain_start=domain_start,
        nodes_per_panel=n,
        panel_width=width,
    )


def midpoint_grid(domain_end: float, count: int, domain_start: float = 0.0) -> QuadratureGrid:
    """Uniform cell-centred grid (j + 1/2) h"""
    if count < 2:
        raise DomainError("midpoint grid needs at least two cells")
    h = (domain_end - domain_start) / count
    nodes = domain_start + h * (np.arange(count) + 0.5)
    return QuadratureGrid(
        nodes=nodes,
        weights=np.full(count, h),
        domain_end=domain_end,
        domain_start=domain_start,
        nodes_per_panel=1,
        panel_width=h,
    )


def data_panel_width(wavenumber_max: float, fraction: float = 0.25) -> float:
    """Panel width min(MAX_PANEL_WIDTH, fraction * pi / wavenumber_max)"""
    return min(get_settings().MAX_PANEL_WIDTH, fraction * math.pi / wavenumber_max)


def spectral_panel_width(z_extent: float, t_max: float = 0.0, nodes_per_panel: Optional[int] = None) -> float:
    """GL panel width in m whose mean node spacing is SPECTRAL_SPACING_FACTOR * pi / (2 (z_extent + t_max))"""
    settings = get_settings()
    n = nodes_per_panel or settings.NODES_PER_PANEL
    spacing = settings.SPECTRAL_SPACING_FACTOR * math.pi / (2.0 * (z_extent + abs(t_max)))
    return min(settings.MAX_PANEL_WIDTH, n * spacing)


def spectral_grid(m_max: float, extent: float, nodes_per_panel: Optional[int] = None) -> QuadratureGrid:
    """Mass grid on (0, m_max] resolving fields that live in z < extent"""
    n = nodes_per_panel or get_settings().NODES_PER_PANEL
    grid = composite_gauss_legendre(m_max, spectral_panel_width(extent, 0.0, n), n)
    logger.debug(f"Spectral grid: m_max={m_max}, extent={extent}, nodes={grid.size}")
    return grid


def _check_axis(grid: QuadratureGrid, values: np.ndarray, axis: int) -> np.ndarray:
    values = np.asarray(values)
    if values.shape[axis] != grid.size:
        raise ShapeError(f"axis {axis} has length {values.shape[axis]}, grid has {grid.size}")
    return np.moveaxis(values, axis, -1)


def integrate(grid: QuadratureGrid, values: np.ndarray, axis: int = -1) -> np.ndarray:
    return _check_axis(grid, values, axis) @ grid.weights


def differentiate(grid: QuadratureGrid, values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Derivative along axis: panel-wise spectral on GL grids, second order on midpoint grids"""
    v = _check_axis(grid, values, axis)
    n = grid.nodes_per_panel
    if n == 1:
        out = np.gradient(v, grid.nodes, axis=-1, edge_order=2)
    else:
        diff, _, _ = _reference_operators(n)
        panels = v.reshape(v.shape[:-1] + (grid.panel_count, n))
        out = (panels @ diff.T * (2.0 / grid.panel_width)).reshape(v.shape)
    return np.moveaxis(out, -1, axis)


def trace_at_end(grid: QuadratureGrid, values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Value at domain_end from the last panel's interpolant"""
    v = _check_axis(grid, values, axis)
    n = grid.nodes_per_panel
    if n == 1:
        return 1.5 * v[..., -1] - 0.5 * v[..., -2]
    _, right, _ = _reference_operators(n)
    return v[..., -n:] @ right
