"""
Ray-level reflection at the horizon and the Euclidean lift of the z-problem

For mu = (nu^2 - 1) / 4 the function Psi = z^(-(N-1)/2) Phi, N = nu + 2,
solves the free wave equation in N radial variables.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from kktower.core.errors import PreconditionError, TrackingError
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.reports import PacketTrajectory, VerificationReport
from kktower.schemas.towers import ContinuousTower
from kktower.services import energy_service
from kktower.services.halfline_service import HalfLineService
from kktower.services.quadrature_service import midpoint_grid

logger = logging.getLogger(__name__)


def _peak(z: np.ndarray, amplitude: np.ndarray) -> Tuple[float, float]:
    """Sub-grid argmax by a parabola through the three nodes around the discrete maximum"""
    i = int(np.argmax(amplitude))
    if 0 < i < z.size - 1:
        y0, y1, y2 = amplitude[i - 1], amplitude[i], amplitude[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0:
            shift = 0.5 * (y0 - y2) / denom
            h = 0.5 * (z[i + 1] - z[i - 1])
            return float(z[i] + shift * h), float(y1 - 0.25 * (y0 - y2) * shift)
    return float(z[i]), float(amplitude[i])


def _velocity(times: np.ndarray, peaks: np.ndarray) -> Tuple[float, float]:
    fit = linregress(times, peaks)
    return float(fit.slope), float(fit.intercept)


def track_packet(
    tower: ContinuousTower,
    times: Sequence[float],
    z_grid: Optional[QuadratureGrid] = None,
    threshold: float = 1e-3,
    clearance: Optional[float] = None,
    expected_bounce: Optional[float] = None,
    tolerance: float = 0.05,
    bounce_tolerance: float = 0.25,
    energy_tolerance: float = 1e-8,
) -> Tuple[PacketTrajectory, VerificationReport]:
    """Peak of |Phi| over time, incoming and outgoing velocities, bounce time

    Peaks closer to the horizon than `clearance` are excluded from the
    velocity fits.
    """
    if tower.params.nu is None:
        raise PreconditionError("packet tracking needs mu = (nu^2 - 1) / 4")
    if tower.is_radial:
        raise PreconditionError("packet tracking works on x-independent towers")
    times = sorted(float(t) for t in times)
    t_max = max(abs(t) for t in times)
    if z_grid is None:
        spacing = 0.25 * math.pi / float(tower.m_grid[-1])
        z_grid = midpoint_grid(tower.z_extent + t_max, max(2, math.ceil((tower.z_extent + t_max) / spacing)))
    synth = HalfLineService.synthesizer(tower, z_grid)

    peaks, amplitudes = [], []
    reference = None
    for t in times:
        amplitude = np.abs(synth.state(t).phi)
        z_peak, height = _peak(z_grid.nodes, amplitude)
        reference = height if reference is None else reference
        if height < threshold * reference:
            raise TrackingError(f"peak fell to {height:.3e} at t={t}, below {threshold} of the initial peak")
        peaks.append(z_peak)
        amplitudes.append(height)
    t_arr, z_arr = np.array(times), np.array(peaks)

    clearance = clearance if clearance is not None else 0.25 * float(z_arr[0])
    turn = int(np.argmin(z_arr))
    incoming = (t_arr <= t_arr[turn]) & (z_arr >= clearance)
    outgoing = (t_arr >= t_arr[turn]) & (z_arr >= clearance)
    bounced = 0 < turn < t_arr.size - 1 and incoming.sum() >= 2 and outgoing.sum() >= 2

    measured = {}
    if bounced:
        v_in, c_in = _velocity(t_arr[incoming], z_arr[incoming])
        v_out, c_out = _velocity(t_arr[outgoing], z_arr[outgoing])
        bounce_time = (c_out - c_in) / (v_in - v_out)
        measured.update({"v_in": v_in, "v_out": v_out, "bounce_time": bounce_time})
        passed = abs(v_in + 1.0) < tolerance and abs(v_out - 1.0) < tolerance
        if expected_bounce is not None:
            passed = passed and abs(bounce_time - expected_bounce) <= bounce_tolerance
    else:
        v_in, _ = _velocity(t_arr, z_arr)
        v_out, bounce_time = v_in, None
        measured.update({"v_in": v_in, "v_out": v_out})
        passed = abs(abs(v_in) - 1.0) < tolerance

    gl_z, _ = HalfLineService.target_grids(tower, t_max)
    energy_synth = HalfLineService.synthesizer(tower, gl_z)
    totals = np.array([energy_service.energy(energy_synth.state(t), tower.params).total for t in times])
    drift = float(np.max(np.abs(totals - totals[0])) / max(totals[0], 1e-300))
    measured["energy_drift"] = drift
    passed = bool(passed and drift < energy_tolerance)
    logger.info(f"Packet: v_in={v_in:.4f}, v_out={v_out:.4f}, bounce={bounce_time}, energy drift {drift:.2e}")

    trajectory = PacketTrajectory(
        times=t_arr, peaks=z_arr, amplitudes=np.array(amplitudes), v_in=v_in, v_out=v_out, bounce_time=bounce_time
    )
    report = VerificationReport(
        check_name="packet",
        passed=passed,
        measured=measured,
        tolerance=tolerance,
        notes="bounce detected" if bounced else "no bounce in the sampled window",
    )
    return trajectory, report


def lift_residual(
    series: Sequence[FieldState],
    params: ModelParams,
    z_min: Optional[float] = None,
    tolerance: float = 5e-3,
) -> VerificationReport:
    """Centred-difference residual of the free wave equation for the lifted field

    The series must be x-independent, on one uniform grid, at uniform times.
    """
    if params.nu is None:
        raise PreconditionError("the lift needs mu = (nu^2 - 1) / 4")
    if len(series) < 3:
        raise PreconditionError("the lift residual needs at least three time levels")
    if any(s.is_radial for s in series):
        raise PreconditionError("the lift residual works on x-independent series")
    z_grid = series[0].z_grid
    z = z_grid.nodes
    h = float(np.mean(np.diff(z)))
    if np.max(np.abs(np.diff(z) - h)) > 1e-9 * h:
        raise PreconditionError("the lift residual needs a uniform z grid")
    times = np.array([s.t for s in series])
    dt = float(np.mean(np.diff(times)))
    if np.max(np.abs(np.diff(times) - dt)) > 1e-9 * max(dt, 1e-300):
        raise PreconditionError("the lift residual needs uniform time steps")

    dimension = params.lift_dimension
    psi = np.array([s.phi for s in series]) * z ** (-(dimension - 1) / 2.0)
    psi_tt = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / dt**2
    inner = psi[1:-1]
    laplacian = (inner[:, 2:] - 2.0 * inner[:, 1:-1] + inner[:, :-2]) / h**2 + (dimension - 1) / z[1:-1] * (
        inner[:, 2:] - inner[:, :-2]
    ) / (2.0 * h)
    keep = z[1:-1] >= (z_min if z_min is not None else 10.0 * h)
    residual = psi_tt[:, 1:-1][:, keep] - laplacian[:, keep]
    scale = float(np.linalg.norm(psi_tt[:, 1:-1][:, keep]))
    ratio = float(np.linalg.norm(residual)) / max(scale, 1e-300)
    return VerificationReport(
        check_name="lift_residual",
        passed=ratio < tolerance,
        measured={"residual": ratio, "h": h, "dt": dt},
        tolerance=tolerance,
        notes=f"N={dimension}, {len(series)} time levels",
    )


def lift_residual_study(
    tower: ContinuousTower,
    t_center: float,
    h: float,
    refinements: int = 2,
    tolerance: float = 5e-3,
    z_end: Optional[float] = None,
) -> VerificationReport:
    """Lift residual at spacings h, h/2, ... with dt = h; the residual should fall like h^2"""
    z_end = z_end or tower.z_extent + abs(t_center) + 1.0
    residuals: List[float] = []
    for level in range(refinements + 1):
        hl = h / 2**level
        grid = midpoint_grid(z_end, max(3, round(z_end / hl)))
        spacing = grid.panel_width
        series = HalfLineService.evolve_series(tower, [t_center - spacing, t_center, t_center + spacing], grid)
        residuals.append(lift_residual(series, tower.params, tolerance=tolerance).measured["residual"])
    orders = [math.log2(a / b) for a, b in zip(residuals, residuals[1:]) if a > 0 and b > 0]
    measured = {f"residual_h{level}": value for level, value in enumerate(residuals)}
    measured.update({f"order_{level}": value for level, value in enumerate(orders)})
    passed = residuals[-1] < tolerance and bool(orders) and min(orders) >= 1.5
    return VerificationReport(
        check_name="lift_residual",
        passed=bool(passed),
        measured=measured,
        tolerance=tolerance,
        notes=f"t={t_center}, h={h}, {refinements} refinements",
    )
