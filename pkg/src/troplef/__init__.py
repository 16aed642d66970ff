"""Exact cellular cosheaf homology, Poincaré–Lefschetz duality and tropical Lefschetz maps."""

from .errors import HypothesisError, TroplefError, ValidationError
from .lattice import INT, RAT, CoeffRing, GroupStructure, Lattice

__version__ = "0.1.0"

__all__ = [
    "CoeffRing", "GroupStructure", "HypothesisError", "INT", "Lattice", "RAT",
    "TroplefError", "ValidationError",
]
