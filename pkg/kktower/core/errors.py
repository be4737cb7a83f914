"""
Error hierarchy

Services raise these; the CLI maps any ``KKTowerError`` to exit code 2.
"""

from typing import Optional


class KKTowerError(Exception):
    """Base class for all engine errors"""


class DomainError(KKTowerError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class ShapeError(KKTowerError, ValueError):
    """Sample arrays and grids disagree in shape"""


class ConvergenceError(KKTowerError, RuntimeError):
    """A root could not be refined to tolerance"""


class TailError(KKTowerError, RuntimeError):
    """Truncation discarded more than the configured budget"""

    def __init__(self, message: str, tail: float, budget: float):
        super().__init__(f"{message} (tail={tail:.3e}, budget={budget:.3e})")
        self.tail = tail
        self.budget = budget


class AdmissibilityError(DomainError):
    """Strichartz exponents violate the selected admissibility relation"""


class PreconditionError(KKTowerError, ValueError):
    """A check was requested outside the hypotheses it verifies"""


class TrackingError(KKTowerError, RuntimeError):
    """Packet peak fell below the detection threshold"""


class FitError(KKTowerError, ValueError):
    """Not enough usable points for a decay fit"""


class CFLError(DomainError):
    """Time step violates the CFL bound"""


class NumericalBlowUpError(KKTowerError, RuntimeError):
    """Non-finite values appeared during time stepping"""


class ScenarioError(KKTowerError, ValueError):
    """Scenario document is malformed or inconsistent"""

    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
