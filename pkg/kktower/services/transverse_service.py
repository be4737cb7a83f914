"""
Transverse reduction of fields radial in x

A radial field Phi(r, z) is carried as chi = r Phi, expanded in the
orthonormal sine basis sqrt(2/L) sin(k_n r), k_n = n pi / L, on [0, L].
The 3D measure 4 pi r^2 dr becomes 4 pi dr for chi.
"""

import math
from typing import Optional

import numpy as np

from kktower.core.errors import DomainError
from kktower.schemas.grids import QuadratureGrid


def radial_wavenumbers(k_count: int, k_max: float) -> np.ndarray:
    """k_n = n k_max / k_count for n = 1..k_count"""
    if k_count < 1 or k_max <= 0:
        raise DomainError("radial basis needs k_count >= 1 and k_max > 0")
    return k_max * np.arange(1, k_count + 1) / k_count


def radial_extent(k_grid: np.ndarray) -> float:
    """Length L of the sine basis whose wavenumbers are k_grid"""
    k_grid = np.asarray(k_grid, dtype=float)
    extent = math.pi / k_grid[0]
    expected = math.pi * np.arange(1, k_grid.size + 1) / extent
    if not np.allclose(k_grid, expected, rtol=1e-12, atol=0.0):
        raise DomainError("radial wavenumbers must be n pi / L, n = 1, 2, ...")
    return extent


def sine_matrix(k_grid: np.ndarray, extent: float, r: np.ndarray) -> np.ndarray:
    """S[n, j] = sqrt(2/L) sin(k_n r_j)"""
    return math.sqrt(2.0 / extent) * np.sin(np.outer(k_grid, r))


def sine_transform(
    chi: np.ndarray, r_grid: QuadratureGrid, k_grid: np.ndarray, extent: Optional[float] = None
) -> np.ndarray:
    """Coefficients of chi (shape (R, ...)) in the sine basis; result has shape (K, ...)"""
    extent = extent or radial_extent(k_grid)
    if r_grid.domain_end > extent + 1e-12:
        raise DomainError(f"r grid reaches {r_grid.domain_end} beyond the basis length {extent}")
    basis = sine_matrix(k_grid, extent, r_grid.nodes) * r_grid.weights[None, :]
    return np.tensordot(basis, chi, axes=(1, 0))


def sine_synthesis(coeffs: np.ndarray, r: np.ndarray, k_grid: np.ndarray, extent: float) -> np.ndarray:
    """Inverse of sine_transform on the points r; result has shape (len(r), ...)"""
    basis = sine_matrix(k_grid, extent, r)
    return np.tensordot(basis.T, coeffs, axes=(1, 0))
