"""Hyperbolic quadtrees, L-orders and approximate neighbour search in the half-space model."""

from .cover import ShiftFamily, covering_ratio, shift_family
from .geometry import Horobox, Isometry, Point, apply_isometry, distance
from .lorder import Ordering, lorder_compare, shifted_compare
from .nnindex import NeighborIndex, brute_force_closest_pair, brute_force_nearest
from .quadtree import build, build_aligned, dfs_order, infinite_cell

__version__ = "0.1.0"

__all__ = [
    "Point",
    "Isometry",
    "Horobox",
    "distance",
    "apply_isometry",
    "Ordering",
    "lorder_compare",
    "shifted_compare",
    "ShiftFamily",
    "shift_family",
    "covering_ratio",
    "NeighborIndex",
    "brute_force_nearest",
    "brute_force_closest_pair",
    "build",
    "build_aligned",
    "dfs_order",
    "infinite_cell",
]
