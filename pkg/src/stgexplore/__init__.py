"""Skeleton-based topological exploration in a deterministic 2D grid world."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
