"""
Named physical checks producing VerificationReports
"""

import logging
import math
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from kktower.core.config import get_settings
from kktower.core.errors import FitError, PreconditionError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.reports import DecayFit, VerificationReport
from kktower.schemas.towers import BraneTower, ContinuousTower
from kktower.services import energy_service
from kktower.services.brane_service import BraneService
from kktower.services.halfline_service import HalfLineService
from kktower.services.hankel_service import field_mass, hankel_forward, hankel_inverse, hankel_kernel
from kktower.services.modal_service import ModalSynthesizer, spectral_energy
from kktower.services.quadrature_service import composite_gauss_legendre, data_panel_width, spectral_grid
from kktower.services.specfun_service import bessel_zeros

logger = logging.getLogger(__name__)

Tower = Union[ContinuousTower, BraneTower]
Grids = Tuple[QuadratureGrid, Optional[QuadratureGrid]]

ENERGY_FLOOR = 1e-300


def _service(tower: Tower):
    return BraneService if isinstance(tower, BraneTower) else HalfLineService


def _grids(tower: Tower, t_max: float, grids: Optional[Grids]) -> Grids:
    return grids if grids is not None else _service(tower).target_grids(tower, t_max)


def _synthesizer(tower: Tower, t_max: float, grids: Optional[Grids]) -> ModalSynthesizer:
    z_grid, r_grid = _grids(tower, t_max, grids)
    return _service(tower).synthesizer(tower, z_grid, r_grid)


def grid_energy(state: FieldState, tower: Tower, alpha_branch: Optional[str] = None):
    if isinstance(tower, BraneTower):
        return energy_service.brane_energy(state, tower.params, alpha_branch)
    return energy_service.energy(state, tower.params, alpha_branch)


def _mass_density(state: FieldState) -> np.ndarray:
    """Quadrature-weighted |Phi|^2 in the 3D measure (or per unit transverse volume)"""
    w_z = state.z_grid.weights
    if state.is_radial:
        r = state.r_grid
        return 4.0 * math.pi * (r.weights * r.nodes**2)[:, None] * w_z[None, :] * np.abs(state.phi) ** 2
    return w_z * np.abs(state.phi) ** 2


def _grid_margin(state: FieldState) -> float:
    spacing = state.z_grid.mean_spacing
    if state.is_radial:
        spacing = max(spacing, state.r_grid.mean_spacing)
    return 2.0 * spacing


def check_hankel_roundtrip(
    order: float,
    z_extent: float = 12.0,
    m_max: float = 12.0,
    tolerance: Optional[float] = None,
) -> VerificationReport:
    """Round trip and Parseval for u(z) = z^(lambda + 1/2) exp(-z^2)"""
    tol = tolerance if tolerance is not None else get_settings().ROUNDTRIP_TOLERANCE
    z_grid = composite_gauss_legendre(z_extent, data_panel_width(m_max))
    m_grid = spectral_grid(m_max, z_extent)
    u = z_grid.nodes ** (order + 0.5) * np.exp(-z_grid.nodes**2)
    spectrum = hankel_forward(order, u, z_grid, m_grid)
    back = hankel_inverse(spectrum, z_grid)
    mass = field_mass(u, z_grid)
    roundtrip = math.sqrt(field_mass(back - u, z_grid) / mass)
    parseval = abs(spectrum.spectral_mass() - mass) / mass

    pair_grid = composite_gauss_legendre(z_extent, data_panel_width(5.0))
    pair = pair_grid.nodes ** (order + 0.5) * np.exp(-pair_grid.nodes**2 / 2)
    m_samples = np.linspace(0.1, 5.0, 50)
    transformed = hankel_kernel(order, m_samples, pair_grid.nodes) @ (pair_grid.weights * pair)
    expected = m_samples ** (order + 0.5) * np.exp(-m_samples**2 / 2)
    pair_error = float(np.max(np.abs(transformed - expected) / expected))

    passed = roundtrip < tol and parseval < 1e-8 and pair_error < tol
    return VerificationReport(
        check_name="hankel_roundtrip",
        passed=passed,
        measured={
            "roundtrip_rel_l2": roundtrip,
            "parseval_deviation": parseval,
            "self_reciprocal_max_rel": pair_error,
        },
        tolerance=tol,
        notes=f"order={order}, z_extent={z_extent}, m_max={m_max}",
    )


def check_brane_spectrum(params: ModelParams, count: int = 10, tolerance: float = 1e-10) -> VerificationReport:
    """Eigenvalues, closed-form modes and orthonormality of the brane spectrum"""
    spectrum = BraneService.brane_spectrum(params, count)
    gram = BraneService.gram_matrix(spectrum)
    measured: Dict[str, float] = {
        "lambda_0": float(spectrum.eigenvalues[0]),
        "gram_defect": float(np.max(np.abs(gram - np.eye(count)))),
        "max_robin_residual": float(np.max(np.abs(spectrum.robin_residuals))),
        "max_robin_defect": float(np.max(np.abs(BraneService.robin_defects(spectrum)))),
    }
    passed = measured["gram_defect"] < 1e-8 and spectrum.eigenvalues[0] > 0
    notes = f"lambda={params.lambda_index:.6g}, {count} modes"
    if abs(params.lambda_index - 2.0) < 1e-12:
        zeros = np.array(bessel_zeros(1.0, count))
        z_samples = np.array([0.25, 0.5, 0.75])
        closed = max(
            float(
                np.max(
                    np.abs(
                        BraneService.eval_mode(spectrum, n, z_samples)
                        - BraneService.closed_form_gravitational(spectrum, n, z_samples)
                    )
                )
            )
            for n in range(count)
        )
        measured["max_zero_mismatch"] = float(np.max(np.abs(spectrum.eigenvalues - zeros)))
        measured["max_closed_form_mismatch"] = closed
        passed = (
            passed
            and measured["max_zero_mismatch"] < tolerance
            and closed < tolerance
            and spectrum.eigenvalues[0] > 1.0
        )
        notes += "; compared with zeros of J_1 and sqrt(2z) J_2(lambda_n z) / J_2(lambda_n)"
    return VerificationReport(
        check_name="brane_spectrum", passed=bool(passed), measured=measured, tolerance=tolerance, notes=notes
    )


def check_conservation(
    tower: Tower,
    times: Sequence[float],
    grids: Optional[Grids] = None,
    tolerance: Optional[float] = None,
    alpha_branch: Optional[str] = None,
) -> VerificationReport:
    """Maximum relative drift of the grid-side and spectral energies over times"""
    if len(times) < 2:
        raise PreconditionError("conservation needs at least two times")
    tol = tolerance if tolerance is not None else get_settings().CONSERVATION_TOLERANCE
    synth = _synthesizer(tower, max(abs(t) for t in times), grids)
    grid_totals = np.array([grid_energy(synth.state(t), tower, alpha_branch).total for t in times])
    spectral_totals = np.array([spectral_energy(tower, t).total for t in times])
    ref_grid = max(grid_totals[0], ENERGY_FLOOR)
    ref_spec = max(spectral_totals[0], ENERGY_FLOOR)
    drift_grid = float(np.max(np.abs(grid_totals - grid_totals[0])) / ref_grid)
    drift_spec = float(np.max(np.abs(spectral_totals - spectral_totals[0])) / ref_spec)
    mismatch = float(abs(grid_totals[0] - spectral_totals[0]) / ref_spec)
    logger.info(f"Conservation: grid drift {drift_grid:.3e}, spectral drift {drift_spec:.3e}, mismatch {mismatch:.3e}")
    return VerificationReport(
        check_name="conservation",
        passed=drift_grid < tol,
        measured={
            "max_rel_deviation_grid": drift_grid,
            "max_rel_deviation_spectral": drift_spec,
            "grid_vs_spectral_t0": mismatch,
            "energy_t0": float(grid_totals[0]),
        },
        tolerance=tol,
        notes=f"{len(times)} times up to t={max(times):g}",
    )


def check_finite_speed(
    tower: Tower,
    R: float,
    t: float,
    grids: Optional[Grids] = None,
    slope: float = 1.0,
    tolerance: float = 1e-6,
    negative_control: bool = False,
) -> VerificationReport:
    """Relative L^2 mass outside the cone {|x| <= R + slope |t|, z <= R + slope |t|}"""
    synth = _synthesizer(tower, abs(t), grids)
    state = synth.state(t)
    density = _mass_density(state)
    cut = R + slope * abs(t) + _grid_margin(state)
    outside = state.z_grid.nodes > cut
    if state.is_radial:
        outside = outside[None, :] | (state.r_grid.nodes[:, None] > cut)
    total = float(np.sum(density))
    ratio = float(np.sum(density[outside])) / max(total, ENERGY_FLOOR)
    return VerificationReport(
        check_name="finite_speed",
        passed=ratio < tolerance,
        measured={"relative_mass_outside": ratio, "cut": cut, "t": float(t)},
        tolerance=tolerance,
        notes=f"R={R}, cone slope {slope}",
        negative_control=negative_control,
    )


def _require_even_nu(params: ModelParams, enforce: bool, name: str) -> None:
    if enforce and not params.nu_is_even:
        raise PreconditionError(f"{name} needs mu = (nu^2 - 1)/4 with nu even (mu={params.mu})")


def check_lacuna(
    tower: Tower,
    R: float,
    t: float,
    grids: Optional[Grids] = None,
    tolerance: float = 1e-5,
    enforce_hypothesis: bool = True,
    negative_control: bool = False,
) -> VerificationReport:
    """Normalised sup of |Phi| inside |x|^2 + z^2 <= (|t| - R - delta)^2"""
    _require_even_nu(tower.params, enforce_hypothesis, "lacuna")
    if abs(t) <= R:
        return VerificationReport(
            check_name="lacuna",
            passed=True,
            measured={"t": float(t)},
            tolerance=tolerance,
            notes="lacuna region empty for |t| <= R",
            informational=True,
            negative_control=negative_control,
        )
    synth = _synthesizer(tower, abs(t), grids)
    state = synth.state(t)
    radius = abs(t) - R - _grid_margin(state)
    z = state.z_grid.nodes
    if state.is_radial:
        inside = state.r_grid.nodes[:, None] ** 2 + z[None, :] ** 2 <= radius**2
    else:
        inside = z**2 <= radius**2
    amplitude = np.abs(state.phi)
    peak = float(np.max(amplitude))
    if not np.any(inside) or peak == 0.0:
        return VerificationReport(
            check_name="lacuna",
            passed=True,
            measured={"t": float(t), "interior_radius": max(radius, 0.0)},
            tolerance=tolerance,
            notes="no grid nodes inside the lacuna region",
            informational=True,
            negative_control=negative_control,
        )
    ratio = float(np.max(amplitude[inside])) / peak
    logger.info(f"Lacuna at t={t}: interior sup ratio {ratio:.3e}")
    return VerificationReport(
        check_name="lacuna",
        passed=ratio < tolerance,
        measured={"interior_sup_ratio": ratio, "interior_radius": radius, "global_sup": peak, "t": float(t)},
        tolerance=tolerance,
        notes=f"R={R}, mu={tower.params.mu}",
        negative_control=negative_control,
    )


def check_equipartition(
    tower: Tower,
    R: float,
    times: Sequence[float],
    tolerance: float = 1e-5,
    enforce_hypothesis: bool = True,
    negative_control: bool = False,
) -> VerificationReport:
    """|E_kin - E_pot| / E at every t >= R, from the spectral energy"""
    _require_even_nu(tower.params, enforce_hypothesis, "equipartition")
    measured: Dict[str, float] = {}
    late: List[float] = []
    for t in times:
        parts = spectral_energy(tower, t)
        gap = abs(parts.kinetic - parts.potential) / max(parts.total, ENERGY_FLOOR)
        measured[f"gap_t{t:g}"] = gap
        if abs(t) >= R:
            late.append(gap)
    if not late:
        return VerificationReport(
            check_name="equipartition",
            passed=True,
            measured=measured,
            tolerance=tolerance,
            notes="no sampled time reaches |t| >= R",
            informational=True,
            negative_control=negative_control,
        )
    measured["max_gap_after_R"] = max(late)
    return VerificationReport(
        check_name="equipartition",
        passed=max(late) < tolerance,
        measured=measured,
        tolerance=tolerance,
        notes=f"R={R}, {len(late)} of {len(times)} times at |t| >= R",
        negative_control=negative_control,
    )


def fit_decay(
    times: Sequence[float],
    values: Sequence[float],
    window: Optional[Tuple[float, float]] = None,
    min_points: int = 5,
) -> DecayFit:
    """Least squares of log value on log t over the window"""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window if window is not None else (float(np.min(t)), float(np.max(t)))
    keep = (t >= lo) & (t <= hi) & (t > 0)
    if np.any(v[keep] <= 0):
        raise FitError("decay fit needs positive values")
    if int(np.sum(keep)) < min_points:
        raise FitError(f"only {int(np.sum(keep))} points in window [{lo}, {hi}], need {min_points}")
    fit = linregress(np.log(t[keep]), np.log(v[keep]))
    return DecayFit(
        times=t[keep].tolist(),
        values=v[keep].tolist(),
        exponent=float(fit.slope),
        exponent_stderr=float(fit.stderr) if math.isfinite(fit.stderr) else 0.0,
        intercept=float(fit.intercept),
        r_squared=float(min(1.0, max(0.0, fit.rvalue**2))),
        window=(lo, hi),
    )


def weighted_sup_series(
    tower: Tower,
    times: Sequence[float],
    grids: Optional[Grids] = None,
    weight_exponent: Optional[float] = None,
) -> List[float]:
    """sup over the grid of |z^w Phi(t)|, w = -lambda - 1/2 by default"""
    synth = _synthesizer(tower, max(abs(t) for t in times), grids)
    return [float(np.max(np.abs(synth.weighted(t, weight_exponent)))) for t in times]


def check_decay(
    tower: Tower,
    times: Sequence[float],
    expected: float,
    tolerance: float,
    mode: Literal["sharp", "bound"] = "sharp",
    window: Optional[Tuple[float, float]] = None,
    grids: Optional[Grids] = None,
    weight_exponent: Optional[float] = None,
    min_r_squared: Optional[float] = None,
    informational: bool = False,
) -> VerificationReport:
    """Fitted decay exponent of the weighted sup norm against expected"""
    min_r2 = min_r_squared if min_r_squared is not None else get_settings().DECAY_MIN_R2
    values = weighted_sup_series(tower, times, grids, weight_exponent)
    fit = fit_decay(times, values, window)
    if mode == "sharp":
        within = abs(fit.exponent - expected) <= tolerance
    else:
        within = fit.exponent <= expected + tolerance
    logger.info(f"Decay fit: exponent {fit.exponent:.4f} (expected {expected}, {mode}), R^2={fit.r_squared:.4f}")
    return VerificationReport(
        check_name="decay",
        passed=bool(within and fit.r_squared >= min_r2),
        measured={
            "exponent": fit.exponent,
            "exponent_stderr": fit.exponent_stderr,
            "r_squared": fit.r_squared,
            "expected": expected,
        },
        tolerance=tolerance,
        notes=f"{mode} mode over window [{fit.window[0]:g}, {fit.window[1]:g}], {fit.points} points",
        informational=informational,
    )
