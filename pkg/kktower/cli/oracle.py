"""
`oracle-compare` subcommand: finite differences against the spectral tower
"""

import logging
from argparse import Namespace
from pathlib import Path

from kktower.cli.common import EXIT_CHECK_FAILED, EXIT_OK, command
from kktower.schemas.scenario import Scenario
from kktower.services import io_service
from kktower.services.fd_service import FDOracle
from kktower.services.scenario_service import oracle_compare, prepare

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-3


def _tolerance(scenario: Scenario) -> float:
    for check in scenario.checks:
        if check.name == "oracle" and check.tolerance is not None:
            return check.tolerance
    return DEFAULT_TOLERANCE


@command("oracle-compare")
def run(args: Namespace, scenario: Scenario, out: Path) -> int:
    report, fd, spectral = oracle_compare(prepare(scenario), _tolerance(scenario))

    meta = {"fd": fd.config.model_dump(mode="json")}
    io_service.write_snapshot(out / "fd_final.csv", fd.final, meta)
    io_service.write_snapshot(out / "spectral_final.csv", spectral, meta)
    times, energy = FDOracle.fd_energy(fd)
    io_service.write_csv(out / "fd_energy.csv", meta, ["t", "energy"], zip(times.tolist(), energy.tolist()))
    io_service.write_reports(out / "report.json", [report])
    logger.info(f"Oracle comparison: relative L2 {report.measured['relative_l2']:.3e}, passed={report.passed}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED
