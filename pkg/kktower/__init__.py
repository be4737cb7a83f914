"""
kktower - Kaluza-Klein tower engine for the Klein-Gordon equation on the
Poincaré patch of AdS5 with inverse-square potential.
"""

__version__ = "1.0.0"
