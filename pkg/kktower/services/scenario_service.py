"""
Scenario loading, preparation and the check registry

A scenario document is parsed into the Scenario schema with line-precise
errors, prepared into grids, data and a tower, and its checks are dispatched
through a registry keyed by check name.
"""

import bisect
import json
import logging
from json.decoder import scanstring
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from kktower.core.errors import PreconditionError, ScenarioError
from kktower.schemas.fd import FDConfig, FDRun
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.reports import VerificationReport
from kktower.schemas.scenario import CheckSpec, PureMode, Scenario
from kktower.schemas.towers import BraneSpectrum, BraneTower, ContinuousTower
from kktower.services import packet_service, strichartz_service, verify_service
from kktower.services.brane_service import BraneService
from kktower.services.datum_service import sample_datum, state_builder
from kktower.services.fd_service import FDOracle
from kktower.services.halfline_service import HalfLineService, make_params
from kktower.services.quadrature_service import (
    composite_gauss_legendre,
    data_panel_width,
    midpoint_grid,
    spectral_panel_width,
)
from kktower.services.transverse_service import radial_wavenumbers

logger = logging.getLogger(__name__)

Tower = Union[ContinuousTower, BraneTower]
PathLike = Union[str, Path]

DEFAULT_MODE_BUDGET = 1e-8


class _LineIndex:
    """Line of every key and array element of a valid JSON text, keyed by path"""

    def __init__(self, text: str):
        self.text = text
        self.breaks = [i for i, ch in enumerate(text) if ch == "\n"]
        self.lines: Dict[Tuple[Any, ...], int] = {}
        self._decoder = json.JSONDecoder()
        self._walk(0, ())

    def line_of(self, pos: int) -> int:
        return bisect.bisect_right(self.breaks, pos - 1) + 1

    def _skip(self, i: int) -> int:
        while i < len(self.text) and self.text[i] in " \t\r\n":
            i += 1
        return i

    def _walk(self, i: int, path: Tuple[Any, ...]) -> int:
        i = self._skip(i)
        self.lines.setdefault(path, self.line_of(i))
        ch = self.text[i]
        if ch == "{":
            i = self._skip(i + 1)
            if self.text[i] == "}":
                return i + 1
            while True:
                i = self._skip(i)
                key, after = scanstring(self.text, i + 1)
                self.lines[path + (key,)] = self.line_of(i)
                i = self._skip(after) + 1
                i = self._skip(self._walk(i, path + (key,)))
                if self.text[i] == ",":
                    i += 1
                    continue
                return i + 1
        if ch == "[":
            i = self._skip(i + 1)
            if self.text[i] == "]":
                return i + 1
            index = 0
            while True:
                i = self._skip(self._walk(i, path + (index,)))
                if self.text[i] == ",":
                    i += 1
                    index += 1
                    continue
                return i + 1
        _, end = self._decoder.raw_decode(self.text, i)
        return end

    def line_for(self, loc: Tuple[Any, ...]) -> int:
        """Deepest known line along a validation error location"""
        path: Tuple[Any, ...] = ()
        line = self.lines.get((), 1)
        for part in loc:
            candidate = path + (part,)
            if candidate in self.lines:
                path = candidate
                line = self.lines[path]
        return line


def parse_scenario(text: str) -> Scenario:
    """Validate a scenario document; errors carry the offending line"""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, e.lineno) from e
    if not isinstance(document, dict):
        raise ScenarioError("scenario must be a JSON object", 1)
    try:
        return Scenario.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        where = ".".join(str(p) for p in loc) or "scenario"
        raise ScenarioError(f"{where}: {first['msg']}", _LineIndex(text).line_for(loc)) from e


def load_scenario(path: PathLike) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}") from e
    scenario = parse_scenario(text)
    logger.info(f"Loaded scenario '{scenario.name}' from {path}")
    return scenario


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package"""
    path = Path(__file__).resolve().parent.parent / "scenarios" / f"{name}.json"
    if not path.exists():
        raise ScenarioError(f"no bundled scenario named '{name}'")
    return path


class ScenarioContext(BaseModel):
    """Everything a scenario run needs, built once"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    scenario: Scenario
    params: ModelParams
    state0: FieldState
    tower: Tower
    spectrum: Optional[BraneSpectrum] = None
    k_grid: Optional[np.ndarray] = None
    m_grid: Optional[QuadratureGrid] = None

    @property
    def service(self):
        return BraneService if self.is_brane else HalfLineService

    @property
    def is_brane(self) -> bool:
        return self.scenario.geometry == "brane"

    @property
    def transverse_k(self) -> float:
        t = self.scenario.transverse
        return t.k if t.kind == "independent" else 0.0

    def target_grids(self, t_max: Optional[float] = None):
        g = self.scenario.grids
        horizon = self.scenario.t_max if t_max is None else t_max
        return self.service.target_grids(
            self.tower, horizon, g.target_margin, g.target_panel_fraction, g.nodes_per_panel
        )


def _r_data_grid(scenario: Scenario) -> Tuple[Optional[np.ndarray], Optional[QuadratureGrid]]:
    t = scenario.transverse
    if t.kind != "radial":
        return None, None
    k_grid = radial_wavenumbers(t.k_count, t.k_max)
    g = scenario.grids
    r_grid = composite_gauss_legendre(t.r_data, data_panel_width(t.k_max, g.data_panel_fraction), g.nodes_per_panel)
    return k_grid, r_grid


def mass_grid(scenario: Scenario) -> QuadratureGrid:
    """Half-line quadrature in m: spacing resolves data within z_data up to the last scenario time"""
    g = scenario.grids
    z_data = g.z_data or scenario.datum.support_radius
    width = spectral_panel_width(z_data, scenario.t_max + g.target_margin, g.nodes_per_panel)
    return composite_gauss_legendre(g.m_max, width, g.nodes_per_panel)


def prepare(scenario: Scenario) -> ScenarioContext:
    """Parameters, sampled data and the tower of a scenario"""
    params = make_params(scenario.effective_mu)
    g = scenario.grids
    k_grid, r_grid = _r_data_grid(scenario)
    k = scenario.transverse.k if scenario.transverse.kind == "independent" else 0.0
    npp = g.nodes_per_panel

    if scenario.geometry == "halfline":
        z_data = g.z_data or scenario.datum.support_radius
        z_grid = composite_gauss_legendre(z_data, data_panel_width(g.m_max, g.data_panel_fraction), npp)
        m_grid = mass_grid(scenario)
        state0 = sample_datum(scenario.datum, params, z_grid, r_grid, transverse_k=k)
        tower = HalfLineService.decompose(state0, params, m_grid, k_grid, tail_budget=g.tail_budget)
        return ScenarioContext(
            scenario=scenario, params=params, state0=state0, tower=tower, k_grid=k_grid, m_grid=m_grid
        )

    if isinstance(scenario.datum, PureMode) or g.mode_count is not None:
        count = g.mode_count or scenario.datum.n + 1
        if isinstance(scenario.datum, PureMode) and scenario.datum.n >= count:
            raise PreconditionError(f"pure_mode n={scenario.datum.n} needs mode_count > {scenario.datum.n}")
        spectrum = BraneService.brane_spectrum(params, count)
        z_grid = BraneService.data_grid(spectrum, npp)
        state0 = sample_datum(scenario.datum, params, z_grid, r_grid, spectrum, k)
        tower = BraneService.brane_decompose(state0, spectrum, k_grid, tail_budget=g.tail_budget)
    else:
        z_grid = composite_gauss_legendre(1.0, data_panel_width(g.m_max, g.data_panel_fraction), npp)
        state0 = sample_datum(scenario.datum, params, z_grid, r_grid, transverse_k=k)
        tower = BraneService.choose_mode_count(
            state0, params, budget=g.mode_budget or DEFAULT_MODE_BUDGET, k_grid=k_grid
        )
        spectrum = tower.spectrum
    return ScenarioContext(
        scenario=scenario, params=params, state0=state0, tower=tower, spectrum=spectrum, k_grid=k_grid
    )


def fd_grids(context: ScenarioContext, h: Optional[float] = None) -> Tuple[QuadratureGrid, Optional[QuadratureGrid]]:
    """Staggered grids for the oracle; the half-line wall sits beyond the light cone"""
    scenario = context.scenario
    h = h or scenario.grids.fd_h
    if context.is_brane:
        z_end = 1.0
    else:
        z_end = context.state0.z_grid.domain_end + scenario.t_max + 4.0 * h
    z_grid = midpoint_grid(z_end, max(2, round(z_end / h)))
    r_grid = None
    if context.state0.is_radial:
        r_end = min(context.tower.radial_extent, context.state0.r_grid.domain_end + scenario.t_max + 4.0 * h)
        r_grid = midpoint_grid(r_end, max(2, round(r_end / h)))
    return z_grid, r_grid


def fd_run(context: ScenarioContext, t_final: Optional[float] = None, h: Optional[float] = None) -> FDRun:
    scenario = context.scenario
    z_grid, r_grid = fd_grids(context, h)
    config = FDConfig.for_final_time(
        z_grid.panel_width,
        scenario.t_max if t_final is None else t_final,
        scenario.grids.fd_courant,
        h_r=r_grid.panel_width if r_grid is not None else None,
        bc_right="robin_3_2" if context.is_brane else "none",
    )
    state0 = sample_datum(scenario.datum, context.params, z_grid, r_grid, context.spectrum, context.transverse_k)
    return FDOracle.fd_evolve(state0, context.params, config, save_every=config.steps)


def oracle_compare(
    context: ScenarioContext, tolerance: float = 1e-3, h: Optional[float] = None
) -> Tuple[VerificationReport, FDRun, FieldState]:
    """FD final state against the spectral tower on the same staggered nodes"""
    run = fd_run(context, h=h)
    final = run.final
    spectral = context.service.synthesizer(context.tower, final.z_grid, final.r_grid).state(final.t)
    report = FDOracle.compare_with_spectral(final, spectral, tolerance)
    measured = dict(report.measured, fd_energy_drift=run.energy_drift)
    return report.model_copy(update={"measured": measured}), run, spectral


CheckRunner = Callable[[ScenarioContext, CheckSpec], List[VerificationReport]]
CHECKS: Dict[str, CheckRunner] = {}


def register(name: str) -> Callable[[CheckRunner], CheckRunner]:
    def decorator(func: CheckRunner) -> CheckRunner:
        CHECKS[name] = func
        return func

    return decorator


def _tol(check: CheckSpec, default: Optional[float]) -> Optional[float]:
    return check.tolerance if check.tolerance is not None else default


def _radius(context: ScenarioContext, check: CheckSpec) -> float:
    return float(check.options.get("R", context.scenario.datum.support_radius))


@register("hankel_roundtrip")
def _hankel_roundtrip(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    orders = check.options.get("orders", [context.params.lambda_index])
    return [
        verify_service.check_hankel_roundtrip(
            float(order),
            z_extent=float(check.options.get("z_extent", 12.0)),
            m_max=float(check.options.get("m_max", context.scenario.grids.m_max)),
            tolerance=check.tolerance,
        )
        for order in orders
    ]


@register("brane_spectrum")
def _brane_spectrum(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    count = int(check.options.get("count", 10))
    return [verify_service.check_brane_spectrum(context.params, count, _tol(check, 1e-10))]


@register("conservation")
def _conservation(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    times = check.options.get("times", context.scenario.times)
    return [
        verify_service.check_conservation(
            context.tower,
            times,
            context.target_grids(max(abs(t) for t in times)),
            check.tolerance,
            context.scenario.alpha_branch,
        )
    ]


@register("finite_speed")
def _finite_speed(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    slope = float(check.options.get("slope", 0.5 if check.negative_control else 1.0))
    times = check.options.get("times", [t for t in context.scenario.times if t != 0] or context.scenario.times)
    grids = context.target_grids()
    return [
        verify_service.check_finite_speed(
            context.tower, _radius(context, check), float(t), grids, slope, _tol(check, 1e-6), check.negative_control
        )
        for t in times
    ]


@register("lacuna")
def _lacuna(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    times = check.options.get("times", [context.scenario.t_max])
    grids = context.target_grids()
    return [
        verify_service.check_lacuna(
            context.tower,
            _radius(context, check),
            float(t),
            grids,
            _tol(check, 1e-5),
            check.enforces_hypothesis,
            check.negative_control,
        )
        for t in times
    ]


@register("equipartition")
def _equipartition(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    times = check.options.get("times", context.scenario.times)
    return [
        verify_service.check_equipartition(
            context.tower,
            _radius(context, check),
            times,
            _tol(check, 1e-5),
            check.enforces_hypothesis,
            check.negative_control,
        )
    ]


def default_decay_exponent(context: ScenarioContext) -> float:
    """t^(-nu/2 - 2) on the half-line when nu is an integer, t^(-3/2) otherwise"""
    nu = context.params.nu
    if context.is_brane or nu is None:
        return -1.5
    return -(nu / 2.0 + 2.0)


@register("decay")
def _decay(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    times = [t for t in context.scenario.times if t > 0]
    window = check.options.get("window")
    report = verify_service.check_decay(
        context.tower,
        times,
        float(check.options.get("expected", default_decay_exponent(context))),
        _tol(check, 0.2),
        check.options.get("mode", "sharp"),
        tuple(window) if window is not None else None,
        context.target_grids(max(times)),
        check.options.get("weight_exponent"),
        informational=check.informational,
    )
    return [report]


@register("strichartz")
def _strichartz(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    o = check.options
    horizons = o.get("horizons", [context.scenario.t_max / 2.0, context.scenario.t_max])
    report = strichartz_service.check_strichartz_bounded(
        context.tower,
        float(o.get("q", 2.0)),
        float(o.get("r", 2.0)),
        horizons,
        float(o.get("dt", 0.25)),
        o.get("family", "general"),
        float(o.get("scale", 2.0)),
        _tol(check, 0.05),
        context.target_grids(max(horizons)),
        float(o.get("growth", 0.0)),
    )
    return [report]


@register("packet")
def _packet(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    if context.is_brane:
        raise PreconditionError("packet tracking runs on the half-line")
    o = check.options
    times = o.get("times", context.scenario.times)
    _, report = packet_service.track_packet(
        context.tower,
        times,
        expected_bounce=o.get("expected_bounce"),
        tolerance=_tol(check, 0.05),
    )
    return [report]


@register("lift_residual")
def _lift_residual(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    if context.is_brane:
        raise PreconditionError("the lift residual runs on the half-line")
    o = check.options
    return [
        packet_service.lift_residual_study(
            context.tower,
            float(o.get("t", context.scenario.t_max)),
            float(o.get("h", 0.05)),
            int(o.get("refinements", 2)),
            _tol(check, 5e-3),
        )
    ]


@register("oracle")
def _oracle(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    h = check.options.get("h")
    report, _, _ = oracle_compare(context, _tol(check, 1e-3), float(h) if h is not None else None)
    return [report]


@register("convergence")
def _convergence(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    o = check.options
    scenario = context.scenario
    h = float(o.get("h", 4.0 * scenario.grids.fd_h))
    z_grid, r_grid = fd_grids(context, h)
    build = state_builder(scenario.datum, context.params, context.spectrum, context.transverse_k)
    report = FDOracle.convergence_study(
        build,
        context.params,
        z_grid.domain_end,
        z_grid.panel_width,
        float(o.get("t", scenario.t_max)),
        int(o.get("refinements", 2)),
        o.get("mode", "space"),
        scenario.grids.fd_courant,
        r_grid.domain_end if r_grid is not None else None,
        "robin_3_2" if context.is_brane else "none",
        check.informational,
    )
    return [report]


def run_check(context: ScenarioContext, check: CheckSpec) -> List[VerificationReport]:
    """One registered check with the scenario's control flags applied to its reports"""
    update: Dict[str, Any] = {"negative_control": check.negative_control, "provenance": _provenance(context, check)}
    if check.informational:
        update["informational"] = True
    return [report.model_copy(update=update) for report in CHECKS[check.name](context, check)]


def _provenance(context: ScenarioContext, check: CheckSpec) -> Dict[str, Any]:
    return {
        "scenario": context.scenario.name,
        "geometry": context.scenario.geometry,
        "mu": context.params.mu,
        "options": check.options,
        "tail": float(context.tower.tail),
    }


def run_checks(context: ScenarioContext) -> List[VerificationReport]:
    """Every check of the scenario, in document order"""
    reports: List[VerificationReport] = []
    for check in context.scenario.checks:
        logger.info(f"Running check '{check.name}' for scenario '{context.scenario.name}'")
        for report in run_check(context, check):
            status = "ok" if report.outcome_ok else "FAILED"
            logger.info(f"Check {report.check_name}: passed={report.passed} ({status})")
            reports.append(report)
    return reports


def evolve_outputs(context: ScenarioContext) -> Tuple[List[FieldState], List[Tuple[float, Any]]]:
    """Snapshots at the scenario times on target grids, with their grid-side energies"""
    times = context.scenario.times
    z_grid, r_grid = context.target_grids()
    series = context.service.evolve_series(context.tower, list(times), z_grid, r_grid)
    energies = [
        (s.t, verify_service.grid_energy(s, context.tower, context.scenario.alpha_branch)) for s in series
    ]
    return series, energies
