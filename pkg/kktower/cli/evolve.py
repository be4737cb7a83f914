"""
`evolve` subcommand: tower, snapshots and the energy series
"""

import logging
from argparse import Namespace
from pathlib import Path

from kktower.cli.common import EXIT_OK, command
from kktower.schemas.scenario import Scenario
from kktower.services import io_service
from kktower.services.scenario_service import evolve_outputs, prepare

logger = logging.getLogger(__name__)


@command("evolve")
def run(args: Namespace, scenario: Scenario, out: Path) -> int:
    context = prepare(scenario)
    meta = io_service.tower_metadata(context.tower)
    io_service.write_tower(out / "tower.csv", context.tower)

    series, energies = evolve_outputs(context)
    for index, state in enumerate(series):
        io_service.write_snapshot(out / f"snapshot_{index:03d}.csv", state, meta)
    io_service.write_energy_series(out / "energy.csv", energies, meta)

    totals = [e.total for _, e in energies]
    drift = max(abs(e - totals[0]) for e in totals) / totals[0] if totals[0] > 0 else 0.0
    logger.info(f"Evolved '{scenario.name}' to {len(series)} times, energy drift {drift:.3e}")
    return EXIT_OK
