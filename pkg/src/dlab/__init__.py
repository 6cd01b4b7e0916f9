"""dlab: spectral toolkit for dispersive-equation experiments."""

__version__ = "0.1.0"

from .grid import (
    FOURIER,
    PHYSICAL,
    Grid,
    GridFunction,
    SpaceTimeField,
    forward_transform,
    fractional_derivative,
    inverse_transform,
)

__all__ = [
    "FOURIER",
    "PHYSICAL",
    "Grid",
    "GridFunction",
    "SpaceTimeField",
    "forward_transform",
    "fractional_derivative",
    "inverse_transform",
    "__version__",
]
