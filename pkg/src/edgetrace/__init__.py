"""Monte Carlo edge-diffraction path tracing for acoustic impulse responses."""
from ._backend import COMPILED
from .bedrf import DIRICHLET, NEUMANN, WedgeAngles, bedrf_eval
from .config import SimulationConfig
from .geometry import Scene, TriangleMesh, extract_convex_edges, load_obj
from .ir import ImpulseResponse, snr, snr_of_runs
from .transport import simulate

__version__ = "0.1.0"

__all__ = ["COMPILED", "DIRICHLET", "NEUMANN", "WedgeAngles", "bedrf_eval",
           "SimulationConfig", "Scene", "TriangleMesh", "extract_convex_edges", "load_obj",
           "ImpulseResponse", "snr", "snr_of_runs", "simulate"]
