"""
Core configuration, logging and errors
"""

from kktower.core.config import Settings, get_settings
from kktower.core.logging import configure_logging

__all__ = ["Settings", "get_settings", "configure_logging"]
