from .halfline_service import HalfLineService
from .brane_service import BraneService
from .fd_service import FDOracle
from .scenario_service import ScenarioContext, load_scenario, prepare, run_checks

__all__ = [
    "HalfLineService",
    "BraneService",
    "FDOracle",
    "ScenarioContext",
    "load_scenario",
    "prepare",
    "run_checks",
]
