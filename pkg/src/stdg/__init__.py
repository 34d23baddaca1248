"""Space-time discontinuous Galerkin for 1-D scalar conservation laws.

The solver marches triangulated time slabs with an implicit Newton solve per
slab; the diagnostics module measures the stability and entropy properties
of the computed solutions.
"""

from .config import ConfigError, RunConfig, load_config, parse_config
from .fluxes import (Burgers, BuckleyLeverett, ClampedFlux, FluxKind, LinearAdvection,
                     make_flux)
from .mesh import Pattern, SlabMesh, build_slab_mesh
from .problems import InitialData, parse_initial_data, reference_solution
from .shock_capturing import ViscosityParams
from .solver import (DGSolution, NewtonSettings, NonConvergence, RunState, Scheme, advance,
                     solve_slab)

__version__ = "0.1.0"

__all__ = [
    "Burgers", "BuckleyLeverett", "ClampedFlux", "ConfigError", "DGSolution", "FluxKind",
    "InitialData", "LinearAdvection", "NewtonSettings", "NonConvergence", "Pattern",
    "RunConfig", "RunState", "Scheme", "SlabMesh", "ViscosityParams", "advance",
    "build_slab_mesh", "load_config", "make_flux", "parse_config", "parse_initial_data",
    "reference_solution", "solve_slab",
]
