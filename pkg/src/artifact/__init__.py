"""Heights, point counts and constants for the blow-up of P^3 along a line."""

from .arith import ANTICANONICAL, BundleParams, PrimitivePoint, global_height, height_lt
from .enumerate import CountQuery, count_grid, count_points
from .errors import ArtifactError

__version__ = "0.1.0"

__all__ = [
    "ANTICANONICAL",
    "ArtifactError",
    "BundleParams",
    "CountQuery",
    "PrimitivePoint",
    "count_grid",
    "count_points",
    "global_height",
    "height_lt",
]
