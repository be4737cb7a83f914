"""
`verify` subcommand: run the scenario checks and write the report
"""

import logging
from argparse import Namespace
from pathlib import Path

from kktower.cli.common import EXIT_CHECK_FAILED, EXIT_OK, command
from kktower.schemas.scenario import Scenario
from kktower.services import io_service
from kktower.services.scenario_service import prepare, run_checks

logger = logging.getLogger(__name__)


@command("verify")
def run(args: Namespace, scenario: Scenario, out: Path) -> int:
    reports = run_checks(prepare(scenario))
    io_service.write_reports(out / "report.json", reports)
    failed = [r.check_name for r in reports if not r.outcome_ok]
    if failed:
        logger.warning(f"Checks not behaving as designed: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    return EXIT_OK
