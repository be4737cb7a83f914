"""
Truncated Hankel transform of order lambda by composite quadrature

    (H u)(m) = int_0^Z sqrt(m z) J_lambda(m z) u(z) dz

The transform is an involutive isometry of L^2(0, inf); both directions use
the same kernel matrix with the weights of the integration variable.
"""

import logging
from typing import Optional

import numpy as np
from scipy.special import gammaln, jv

from kktower.core.errors import DomainError, ShapeError
from kktower.schemas.grids import HankelSpectrum, QuadratureGrid
from kktower.utils.parallel import fill_rows

logger = logging.getLogger(__name__)

# below this argument the smooth kernel uses two terms of its power series
_SERIES_CUTOFF = 1e-6


def _smooth_bessel(order: float, x: np.ndarray) -> np.ndarray:
    """x^(-order) J_order(x), analytic and even in x"""
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    big = ~small
    out[big] = jv(order, x[big]) / x[big] ** order
    lead = np.exp(-order * np.log(2.0) - gammaln(order + 1.0))
    out[small] = lead * (1.0 - x[small] ** 2 / (4.0 * (order + 1.0)))
    return out


def hankel_kernel(
    order: float,
    m: np.ndarray,
    z: np.ndarray,
    weighted: bool = False,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Kernel matrix K[i, j] over masses m_i and positions z_j

    weighted=False gives sqrt(m z) J_lambda(m z). weighted=True gives
    m^(lambda + 1/2) (m z)^(-lambda) J_lambda(m z), which equals
    z^(-lambda - 1/2) times the plain kernel without dividing by small z.
    """
    if order <= 0:
        raise DomainError(f"Hankel order must be positive, got {order}")
    m = np.asarray(m, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(m <= 0) or np.any(z <= 0):
        raise DomainError("kernel arguments must be positive")

    if weighted:
        prefactor = m ** (order + 0.5)

        def rows(block: slice) -> np.ndarray:
            return prefactor[block, None] * _smooth_bessel(order, np.outer(m[block], z))

    else:

        def rows(block: slice) -> np.ndarray:
            x = np.outer(m[block], z)
            return np.sqrt(x) * jv(order, x)

    return fill_rows(m.size, z.size, rows, threads=threads)


def hankel_forward(
    order: float,
    samples: np.ndarray,
    grid: QuadratureGrid,
    m_grid: QuadratureGrid,
) -> HankelSpectrum:
    """Quadrature approximation of H_lambda u on the nodes of m_grid"""
    samples = np.asarray(samples)
    if samples.shape != (grid.size,):
        raise ShapeError(f"samples have shape {samples.shape}, grid has {grid.size} nodes")
    kernel = hankel_kernel(order, m_grid.nodes, grid.nodes)
    coeffs = kernel @ (grid.weights * samples)
    logger.debug(f"Hankel forward: order={order}, {grid.size} z-nodes -> {m_grid.size} m-nodes")
    return HankelSpectrum(order=order, m_grid=m_grid.nodes, coeffs=coeffs, m_weights=m_grid.weights)


def hankel_inverse(spectrum: HankelSpectrum, z_grid: QuadratureGrid) -> np.ndarray:
    """Quadrature approximation of the inverse transform on the nodes of z_grid"""
    if spectrum.m_weights is None:
        raise ShapeError("the inverse transform needs m_weights on the spectrum")
    kernel = hankel_kernel(spectrum.order, spectrum.m_grid, z_grid.nodes)
    values = (spectrum.m_weights * spectrum.coeffs) @ kernel
    if not np.any(np.iscomplex(spectrum.coeffs)):
        values = values.real
    return values


def field_mass(samples: np.ndarray, grid: QuadratureGrid) -> float:
    """Discrete L^2 mass of samples on grid"""
    return float(np.sum(grid.weights * np.abs(samples) ** 2))
