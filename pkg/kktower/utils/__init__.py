"""
Shared helpers
"""

from kktower.utils.parallel import fill_rows

__all__ = ["fill_rows"]
