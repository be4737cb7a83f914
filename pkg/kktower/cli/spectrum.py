"""
`spectrum` subcommand: brane eigenvalues or the half-line mass quadrature
"""

import logging
from argparse import Namespace
from pathlib import Path

from kktower.cli.common import EXIT_OK, command
from kktower.schemas.scenario import Scenario
from kktower.services import io_service
from kktower.services.brane_service import BraneService
from kktower.services.halfline_service import make_params
from kktower.services.scenario_service import mass_grid
from kktower.services.specfun_service import eigen_condition_diagnostic

logger = logging.getLogger(__name__)

DEFAULT_COUNT = 10


@command("spectrum")
def run(args: Namespace, scenario: Scenario, out: Path) -> int:
    params = make_params(scenario.effective_mu)
    if scenario.geometry == "brane":
        count = scenario.grids.mode_count or DEFAULT_COUNT
        spectrum = BraneService.brane_spectrum(params, count)
        io_service.write_spectrum(out / "spectrum.csv", spectrum)
        diagnostic = eigen_condition_diagnostic(params.lambda_index, count)
        io_service.write_json(out / "eigen_condition.json", diagnostic.model_dump(mode="json"))
        logger.info(f"Brane spectrum: {count} modes, lambda_0 = {spectrum.eigenvalues[0]:.12g}")
    else:
        grid = mass_grid(scenario)
        io_service.write_mass_grid(out / "spectrum.csv", params, grid)
        logger.info(f"Half-line mass grid: {grid.size} nodes up to m = {grid.domain_end}")
    return EXIT_OK
