"""Stiff coupled-string system, its two-profile reduction, and the tooling to
check one against the other."""

__version__ = "0.1.0"

from .exceptions import SimulationError
from .fluxexpr import FluxExpr, parse_flux
from .params import DerivedParams, PhysicalParams, derive_params
from .profiles import Profile
from .spectral import PeriodicGrid

__all__ = [
    "__version__",
    "SimulationError",
    "FluxExpr",
    "parse_flux",
    "PhysicalParams",
    "DerivedParams",
    "derive_params",
    "Profile",
    "PeriodicGrid",
]
