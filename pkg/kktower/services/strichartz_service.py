"""
Weighted space-time norms of Strichartz type

    I(T) = ( int_0^T || z^w Phi(t) ||_{L^r}^q dt )^(1/q)

with (q, r, w) tied to nu by one of three admissibility families.
"""

import logging
import math
from typing import Dict, List, Literal, Optional, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from kktower.core.errors import AdmissibilityError, DomainError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.reports import VerificationReport
from kktower.schemas.towers import BraneTower, ContinuousTower
from kktower.services.brane_service import BraneService
from kktower.services.halfline_service import HalfLineService
from kktower.services.modal_service import scaled

logger = logging.getLogger(__name__)

Family = Literal["general", "even", "odd"]
Tower = Union[ContinuousTower, BraneTower]

_EXACT = 1e-12


def admissible_weight(q: float, r: float, nu: Optional[int], family: Family = "general") -> float:
    """Weight exponent w of the family, or AdmissibilityError"""
    if q < 2 or r < 2 or not (math.isfinite(q) and math.isfinite(r)):
        raise AdmissibilityError(f"(q, r) = ({q}, {r}) needs 2 <= q, r < inf")
    if nu is None:
        raise AdmissibilityError("Strichartz families need mu = (nu^2 - 1) / 4")
    if family == "general":
        equality = 1 / q + (nu + 5) / r - (nu + 3) / 2
        inequality = 1 / q + (nu + 4) / (2 * r) <= (nu + 4) / 4 + _EXACT
        weight = (nu + 1) * (1 / r - 0.5)
    elif family == "even":
        if nu % 2:
            raise AdmissibilityError(f"family 'even' needs nu even, got {nu}")
        equality = 1 / q + 5 / r - 1.5
        inequality = 1 / q + 2 / r <= 1 + _EXACT
        weight = 1 / r - 0.5
    elif family == "odd":
        if nu % 2 == 0:
            raise AdmissibilityError(f"family 'odd' needs nu odd, got {nu}")
        equality = 1 / q + 6 / r - 2
        inequality = 1 / q + 5 / (2 * r) <= 1.25 + _EXACT
        weight = 2 / r - 1
    else:
        raise AdmissibilityError(f"unknown family {family}")
    if abs(equality) > _EXACT or not inequality:
        raise AdmissibilityError(f"(q, r) = ({q}, {r}) is not admissible in family '{family}' for nu={nu}")
    return weight


def _norm_power(values: np.ndarray, z_grid: QuadratureGrid, r_grid: Optional[QuadratureGrid], r: float) -> float:
    density = np.abs(values) ** r
    if r_grid is not None:
        return float(
            4.0 * math.pi * np.sum((r_grid.weights * r_grid.nodes**2)[:, None] * z_grid.weights[None, :] * density)
        )
    return float(np.sum(z_grid.weights * density))


def spatial_norm_power(state: FieldState, r: float, weight_exponent: float) -> float:
    """int |z^w Phi|^r over space (3D measure for radial states)"""
    return _norm_power(state.z_grid.nodes**weight_exponent * state.phi, state.z_grid, state.r_grid, r)


def _truncated(times: np.ndarray, integrand: np.ndarray, T: float, q: float) -> float:
    keep = (times >= 0.0) & (times <= T + _EXACT)
    if int(np.sum(keep)) < 2:
        return 0.0
    return float(trapezoid(integrand[keep], times[keep]) ** (1.0 / q))


def strichartz_times(t_max: float, dt: float, growth: float = 0.0, marks: Sequence[float] = ()) -> List[float]:
    """Time levels on [0, t_max] with steps max(dt, growth * t), passing through every mark"""
    if dt <= 0 or growth < 0:
        raise DomainError("dt must be positive and growth non-negative")
    times = [0.0]
    while times[-1] < t_max - _EXACT:
        times.append(min(t_max, times[-1] + max(dt, growth * times[-1])))
    extra = {float(m) for m in marks if 0.0 < m <= t_max}
    return sorted(set(times) | extra)


def strichartz_norm(
    series: Sequence[FieldState],
    q: float,
    r: float,
    weight_exponent: Optional[float] = None,
    T: Optional[float] = None,
    nu: Optional[int] = None,
    family: Family = "general",
) -> float:
    """Truncated norm over [0, T] by the trapezoid rule in t"""
    weight = admissible_weight(q, r, nu, family)
    if weight_exponent is not None and abs(weight_exponent - weight) > _EXACT:
        raise AdmissibilityError(f"weight {weight_exponent} differs from the admissible {weight}")
    cutoff = T if T is not None else series[-1].t
    times = np.array([s.t for s in series])
    integrand = np.array([spatial_norm_power(s, r, weight) ** (q / r) for s in series])
    return _truncated(times, integrand, cutoff, q)


def check_strichartz_bounded(
    tower: Tower,
    q: float,
    r: float,
    horizons: Sequence[float],
    dt: float,
    family: Family = "general",
    scale: float = 2.0,
    tolerance: float = 0.05,
    grids=None,
    growth: float = 0.0,
) -> VerificationReport:
    """Saturation of I(T) over doubling horizons and homogeneity under data scaling

    Steps grow like growth * t once that exceeds dt; the integrand decays
    as a power of t there. Homogeneity is measured up to the first horizon.
    """
    nu = tower.params.nu
    weight = admissible_weight(q, r, nu, family)
    horizons = sorted(float(T) for T in horizons)
    t_max = horizons[-1]
    service = BraneService if isinstance(tower, BraneTower) else HalfLineService
    z_grid, r_grid = grids if grids is not None else service.target_grids(tower, t_max)
    times = np.array(strichartz_times(t_max, dt, growth, horizons))

    def integrand(synth, levels: np.ndarray) -> np.ndarray:
        return np.array([_norm_power(synth.weighted(t, weight), z_grid, r_grid, r) ** (q / r) for t in levels])

    values = integrand(service.synthesizer(tower, z_grid, r_grid), times)
    norms = [_truncated(times, values, T, q) for T in horizons]
    early = times[times <= horizons[0] + _EXACT]
    scaled_values = integrand(service.synthesizer(scaled(tower, scale), z_grid, r_grid), early)
    scaled_norm = _truncated(early, scaled_values, horizons[0], q)
    logger.debug(f"Strichartz integrand on {times.size} levels, {early.size} for the scaled tower")

    measured: Dict[str, float] = {f"I_T{T:g}": value for T, value in zip(horizons, norms)}
    if len(norms) >= 2 and norms[-2] > 0:
        saturation = norms[-1] / norms[-2] - 1.0
    else:
        saturation = 0.0
    homogeneity = abs(scaled_norm / (scale * norms[0]) - 1.0) if norms[0] > 0 else abs(scaled_norm)
    measured.update(
        {"saturation": saturation, "homogeneity": homogeneity, "weight": weight, "levels": float(times.size)}
    )
    logger.info(f"Strichartz (q={q:.4g}, r={r:.4g}): saturation {saturation:.3e}, homogeneity {homogeneity:.3e}")
    return VerificationReport(
        check_name="strichartz",
        passed=bool(saturation < tolerance and homogeneity < 1e-10),
        measured=measured,
        tolerance=tolerance,
        notes=f"family {family}, nu={nu}, horizons {horizons}",
    )
