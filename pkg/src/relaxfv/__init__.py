"""Finite-volume methods for multicomponent compressible flows in thermal
nonequilibrium, built around energy-relaxation numerical fluxes."""

from .flux import FluxScheme, InterfaceFlux
from .relax import RelaxGamma, default_gamma
from .thermo import Species, SpeciesSet

__all__ = [
    "FluxScheme",
    "InterfaceFlux",
    "RelaxGamma",
    "Species",
    "SpeciesSet",
    "default_gamma",
]

__version__ = "0.1.0"
