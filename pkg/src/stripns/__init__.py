"""Numerical laboratory for 2D incompressible flow in a strip with Navier-slip walls."""

from .grid import (
    BC,
    GridSpec,
    ScalarField,
    SlipPair,
    StripGeometry,
    VectorField,
    apply_robin_ghost,
    boundary_integral,
    build_grid,
    diff_x,
    diff_y,
    integrate,
)

__version__ = "0.1.0"

__all__ = [
    "BC",
    "GridSpec",
    "ScalarField",
    "SlipPair",
    "StripGeometry",
    "VectorField",
    "apply_robin_ghost",
    "boundary_integral",
    "build_grid",
    "diff_x",
    "diff_y",
    "integrate",
]
