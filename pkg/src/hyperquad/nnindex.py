"""Dynamic approximate nearest neighbours and closest pair in hyperbolic space.

The index keeps one ordered collection per shift of a :class:`ShiftFamily`,
each sorted by that shift's L-order (ties broken on raw coordinates).  A
query looks at its would-be predecessor and successor in every order and
returns the closest of those candidates.
"""

from __future__ import annotations

import gc
import math
import random
from typing import Iterable, Sequence

from .avl import OrderedCollection
from .cover import ShiftFamily, level_for_delta, shift_family
from .geometry import Point, distance
from .lorder import family_keys, shifted_key

__all__ = [
    "MAX_SHIFT_LEVEL",
    "NeighborIndex",
    "max_delta",
    "estimate_delta",
    "brute_force_nearest",
    "brute_force_closest_pair",
]


# Beyond this level the horizontal shift offsets reach 2**63 and leave the
# fixed-point range of the L-order keys.
MAX_SHIFT_LEVEL = 5


def max_delta(d: int) -> float:
    """Largest Delta whose shift family stays within :data:`MAX_SHIFT_LEVEL`."""
    span = 2.0 ** MAX_SHIFT_LEVEL
    log_w = (span - 1.0) * math.log(2.0) - 0.5 * math.log(d - 1)
    # ln(W + 1) >= 2 Delta; W is far above 1 here
    limit = min(span * math.log(2.0), log_w + math.log1p(math.exp(-log_w))) / 2.0
    while level_for_delta(limit, d) > MAX_SHIFT_LEVEL:
        limit = math.nextafter(limit, 0.0)
    return limit


def estimate_delta(points: Sequence[Point], seed: int = 0) -> float:
    """Twice the largest distance over a random sample of ``2n`` pairs.

    Capped at :func:`max_delta`; queries whose true neighbour is farther
    than the cap lose the approximation guarantee.
    """
    pts = list(points)
    if len(pts) < 2:
        return 1.0
    rng = random.Random(seed)
    best = 0.0
    for _ in range(2 * len(pts)):
        a, b = rng.sample(range(len(pts)), 2)
        best = max(best, distance(pts[a], pts[b]))
    if best == 0:
        return 1.0
    return min(2.0 * best, max_delta(pts[0].dim))


class NeighborIndex:
    """Ordered collections keyed by the shifted L-orders of the indexed points."""

    def __init__(self, family: ShiftFamily):
        self.family = family
        self.dim = family.d
        self.orders = [OrderedCollection() for _ in family.shifts]
        self._points: dict[tuple, Point] = {}

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, points: Iterable[Point], delta: float, dim: int | None = None) -> "NeighborIndex":
        pts = list(points)
        if dim is None:
            if not pts:
                raise ValueError("an empty index needs an explicit dimension")
            dim = pts[0].dim
        family = shift_family(delta, dim)
        if family.L > MAX_SHIFT_LEVEL:
            raise ValueError(
                f"delta = {delta} needs shift level {family.L}; at most "
                f"{max_delta(dim):.4g} is supported in dimension {dim}"
            )
        index = cls(family)
        # the load allocates millions of acyclic objects; generational
        # collection passes over them are pure overhead
        was_enabled = gc.isenabled()
        gc.disable()
        try:
            index._bulk_load(pts)
        finally:
            if was_enabled:
                gc.enable()
        return index

    @classmethod
    def from_points(cls, points: Iterable[Point], seed: int = 0) -> "NeighborIndex":
        """Build with Delta taken from :func:`estimate_delta`."""
        pts = list(points)
        return cls.build(pts, estimate_delta(pts, seed))

    def _bulk_load(self, pts: list[Point]) -> None:
        coords = [p.coords for p in pts]
        for p, c in zip(pts, coords):
            self._check(p)
            if c in self._points:
                raise ValueError(f"duplicate point {c}")
            self._points[c] = p
        for i, ints in enumerate(family_keys(self.family.shifts, pts)):
            if len(set(ints)) == len(ints):
                rank = sorted(range(len(pts)), key=ints.__getitem__)
            else:
                # quantization collisions are ordered by coordinates
                rank = sorted(range(len(pts)), key=lambda j: (ints[j], coords[j]))
            self.orders[i] = OrderedCollection.from_sorted([((ints[j], coords[j]), pts[j]) for j in rank])

    def _check(self, p: Point) -> None:
        if p.dim != self.dim:
            raise ValueError(f"expected a point of dimension {self.dim}, got {p.dim}")

    def _keys(self, p: Point):
        return [(shifted_key(s, p), p.coords) for s in self.family.shifts]

    # -- updates ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._points)

    @property
    def size(self) -> int:
        return len(self._points)

    def __contains__(self, p: Point) -> bool:
        return p.coords in self._points

    def points(self) -> list[Point]:
        return list(self._points.values())

    def insert(self, p: Point) -> None:
        self._check(p)
        if p.coords in self._points:
            raise ValueError(f"point {p.coords} is already indexed")
        keys = self._keys(p)
        for order, key in zip(self.orders, keys):
            order.insert(key, p)
        self._points[p.coords] = p

    def remove(self, p: Point) -> None:
        self._check(p)
        if p.coords not in self._points:
            raise ValueError(f"point {p.coords} is not indexed")
        for order, key in zip(self.orders, self._keys(p)):
            order.remove(key)
        del self._points[p.coords]

    # -- queries ------------------------------------------------------------

    @property
    def comparisons(self) -> int:
        return sum(o.comparisons for o in self.orders)

    def reset_counters(self) -> None:
        for o in self.orders:
            o.comparisons = 0

    def candidates(self, q: Point) -> list[Point]:
        """Neighbours of ``q`` in every order (at most two per order)."""
        self._check(q)
        out = []
        for order, key in zip(self.orders, self._keys(q)):
            for hit in (order.floor(key), order.successor(key)):
                if hit is not None:
                    out.append(hit[1])
        return out

    def nearest(self, q: Point) -> Point | None:
        best = None
        best_key = None
        for p in self.candidates(q):
            key = (distance(q, p), p.coords)
            if best_key is None or key < best_key:
                best, best_key = p, key
        return best

    def closest_pair(self) -> tuple[Point, Point]:
        if len(self) < 2:
            raise ValueError("closest pair needs at least two points")
        best = None
        best_key = None
        for order in self.orders:
            prev = None
            for _, p in order:
                if prev is not None:
                    a, b = sorted((prev, p), key=lambda t: t.coords)
                    key = (distance(a, b), a.coords, b.coords)
                    if best_key is None or key < best_key:
                        best, best_key = (a, b), key
                prev = p
        return best

    def sequences(self) -> list[list[Point]]:
        """In-order point sequence of every collection."""
        return [order.values() for order in self.orders]


def brute_force_nearest(points: Sequence[Point], q: Point) -> Point:
    pts = list(points)
    if not pts:
        raise ValueError("no points")
    return min(pts, key=lambda p: (distance(q, p), p.coords))


def brute_force_closest_pair(points: Sequence[Point]) -> tuple[Point, Point]:
    pts = sorted(points, key=lambda p: p.coords)
    if len(pts) < 2:
        raise ValueError("closest pair needs at least two points")
    best = None
    best_d = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dd = distance(pts[i], pts[j])
            if dd < best_d:
                best, best_d = (pts[i], pts[j]), dd
    return best
