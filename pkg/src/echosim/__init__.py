"""Opinion dynamics on adaptive directed networks with priority and stubborn users."""
from ._accel import NUMBA_ENABLED, backend_name
from .graph import AdaptiveDigraph, EdgeError
from .measures import bc_hom, bimodality_coefficient, density_map, neighbor_mean, stubborn_edge_fraction
from .model import ModelParams, OpinionState, Simulation, UserKind, init_state, run, step

__version__ = "0.1.0"

__all__ = ["NUMBA_ENABLED", "backend_name", "AdaptiveDigraph", "EdgeError", "bc_hom", "bimodality_coefficient",
           "density_map", "neighbor_mean", "stubborn_edge_fraction", "ModelParams", "OpinionState", "Simulation",
           "UserKind", "init_state", "run", "step", "__version__"]
