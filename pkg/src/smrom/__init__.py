"""Reduced-order modeling of 2D incompressible flow.

Pipeline: Taylor-Hood finite-element solver with grad-div stabilization
-> POD bases by the method of snapshots -> Galerkin velocity ROM with
residual-based pressure recovery -> stability / a-priori error analysis.
"""

__version__ = "0.1.0"

from .meshing import (TriMesh, generate_structured_square,
                      generate_cylinder_channel, element_geometry)
from .spaces import TaylorHoodSpace
from .kernels import backend_name

__all__ = [
    "TriMesh",
    "generate_structured_square",
    "generate_cylinder_channel",
    "element_geometry",
    "TaylorHoodSpace",
    "backend_name",
    "__version__",
]
