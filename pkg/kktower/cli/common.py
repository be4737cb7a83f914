"""
Shared plumbing for the subcommands
"""

import functools
import logging
from argparse import Namespace
from pathlib import Path
from typing import Callable

from pydantic import ValidationError

from kktower.core.config import get_settings
from kktower.core.errors import KKTowerError
from kktower.schemas.scenario import Scenario
from kktower.services import io_service
from kktower.services.scenario_service import load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def output_dir(args: Namespace, scenario: Scenario) -> Path:
    base = Path(args.out) if args.out else Path(get_settings().OUTPUT_DIR) / scenario.name
    base.mkdir(parents=True, exist_ok=True)
    return base


def command(name: str) -> Callable[[Callable[[Namespace, Scenario, Path], int]], Callable[[Namespace], int]]:
    """Load the scenario, prepare the output directory and map engine and validation errors to exit code 2"""

    def decorator(func: Callable[[Namespace, Scenario, Path], int]) -> Callable[[Namespace], int]:
        @functools.wraps(func)
        def wrapper(args: Namespace) -> int:
            try:
                scenario = load_scenario(args.scenario)
                if args.seed is not None:
                    scenario = scenario.model_copy(update={"seed": args.seed})
                out = output_dir(args, scenario)
                io_service.write_run_metadata(out, scenario, get_settings(), name)
                code = func(args, scenario, out)
                logger.info(f"{name} finished for '{scenario.name}' with exit code {code}")
                return code
            except KKTowerError as e:
                logger.error(f"{name} aborted: {e}")
                return EXIT_ERROR
            except ValidationError as e:
                first = e.errors()[0]["msg"]
                logger.error(f"{name} aborted on an invalid model: {e.error_count()} error(s), first: {first}")
                return EXIT_ERROR

        return wrapper

    return decorator
