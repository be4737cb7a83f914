"""
Command-line subcommands

Each module exposes a `run(args) -> int` handler returning the exit code.
"""

from kktower.cli import evolve, oracle, spectrum, verify

COMMANDS = {
    "spectrum": spectrum.run,
    "evolve": evolve.run,
    "verify": verify.run,
    "oracle-compare": oracle.run,
}

__all__ = ["COMMANDS"]
