"""Numerical laboratory for a hyperbolic-elliptic radiating-gas model.

Half-line and half-plane initial-boundary value problems for a scalar
conservation law coupled to an elliptic equation for the radiative flux,
together with the smoothed rarefaction profiles the long-time dynamics
relax to, and the diagnostics that measure decay rates and structural
properties of the solutions.
"""

__version__ = "0.1.0"

from .flux_model import FluxPair, RiemannData, flux_by_name
from .elliptic import HalfLineGrid, HalfPlaneGrid

__all__ = [
    "FluxPair",
    "RiemannData",
    "flux_by_name",
    "HalfLineGrid",
    "HalfPlaneGrid",
    "__version__",
]
