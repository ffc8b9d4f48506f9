"""Half-space model primitives: points, distances, isometries and horoboxes.

A point of the d-dimensional hyperbolic space is stored as ``(x, z)`` with
``x`` a tuple of ``d - 1`` horizontal coordinates and ``z > 0`` the height.
All values are immutable; every function here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "EPS_BOX",
    "Point",
    "Isometry",
    "Horobox",
    "arsinh",
    "arsinh_exp2",
    "distance",
    "apply_isometry",
    "invert",
    "compose",
    "distance_to_axis_hyperplane",
    "horobox_diameter",
    "horobox_contains",
    "minimum_bounding_horobox",
]

# Width/height used for degenerate bounding boxes (single point, flat sets).
EPS_BOX = 2.0 ** -40

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class Point:
    x: tuple[float, ...]
    z: float

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", float(self.z))
        if len(x) < 1:
            raise ValueError("a point needs at least one horizontal coordinate (d >= 2)")
        if not self.z > 0.0 or not math.isfinite(self.z):
            raise ValueError(f"z must be positive and finite, got {self.z!r}")
        if not all(math.isfinite(v) for v in x):
            raise ValueError("horizontal coordinates must be finite")

    @classmethod
    def of(cls, *coords: float) -> "Point":
        """Build a point from ``d`` numbers, the last one being the height."""
        if len(coords) < 2:
            raise ValueError("need at least two coordinates")
        return cls(tuple(coords[:-1]), coords[-1])

    @property
    def dim(self) -> int:
        return len(self.x) + 1

    @property
    def coords(self) -> tuple[float, ...]:
        return self.x + (self.z,)


@dataclass(frozen=True)
class Isometry:
    """The map ``(x, z) -> (sigma * x + tau, sigma * z)``."""

    sigma: float
    tau: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "tau", tuple(float(t) for t in self.tau))
        if not self.sigma > 0.0 or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")

    @classmethod
    def identity(cls, d: int) -> "Isometry":
        return cls(1.0, (0.0,) * (d - 1))

    def __call__(self, p: Point) -> Point:
        return apply_isometry(self, p)


@dataclass(frozen=True)
class Horobox:
    """Cube-based horobox R(x, z, w, h).

    As a Euclidean box its corners are ``(x, z)`` and
    ``(x + z * (w, ..., w), z * 2**h)``.
    """

    x: tuple[float, ...]
    z: float
    w: float
    h: float

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        for name in ("z", "w", "h"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not value > 0.0:
                raise ValueError(f"horobox {name} must be positive, got {value!r}")

    @property
    def dim(self) -> int:
        return len(self.x) + 1

    @property
    def euclidean_width(self) -> float:
        return self.z * self.w

    @property
    def top(self) -> float:
        return self.z * 2.0 ** self.h

    def corners(self) -> list[Point]:
        """All 2^d Euclidean corner points."""
        d = self.dim
        out = []
        for mask in range(1 << d):
            x = tuple(
                xi + (self.euclidean_width if mask >> i & 1 else 0.0)
                for i, xi in enumerate(self.x)
            )
            z = self.top if mask >> (d - 1) & 1 else self.z
            out.append(Point(x, z))
        return out


def arsinh(t: float) -> float:
    return math.asinh(t)


def arsinh_exp2(k: float) -> float:
    """arsinh(2**k), also for exponents where 2**k overflows a double."""
    if k < 1000:
        return math.asinh(2.0 ** k)
    # arsinh(t) = ln(2t) + O(t^-2)
    return (k + 1.0) * _LN2


def _check_dims(p: Point, q: Point) -> None:
    if len(p.x) != len(q.x):
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")


def distance(p: Point, q: Point) -> float:
    """Hyperbolic distance between two points of the half-space model."""
    _check_dims(p, q)
    s = 0.0
    for a, b in zip(p.x, q.x):
        s += (a - b) * (a - b)
    dz = p.z - q.z
    # the sum is symmetric in (p, q), so the result is bit-for-bit symmetric
    return 2.0 * math.asinh(0.5 * math.sqrt((s + dz * dz) / (p.z * q.z)))


def apply_isometry(t: Isometry, p: Point) -> Point:
    if len(t.tau) != len(p.x):
        raise ValueError("isometry and point dimensions differ")
    s = t.sigma
    return Point(tuple(s * a + b for a, b in zip(p.x, t.tau)), s * p.z)


def invert(t: Isometry) -> Isometry:
    s = 1.0 / t.sigma
    return Isometry(s, tuple(-b * s for b in t.tau))


def compose(outer: Isometry, inner: Isometry) -> Isometry:
    """The isometry applying ``inner`` first, then ``outer``."""
    if len(outer.tau) != len(inner.tau):
        raise ValueError("isometry dimensions differ")
    s = outer.sigma
    return Isometry(s * inner.sigma, tuple(s * a + b for a, b in zip(inner.tau, outer.tau)))


def distance_to_axis_hyperplane(p: Point, axis: int) -> float:
    """Distance from ``p`` to the hyperplane ``x_axis = 0`` (axes are 1-based)."""
    if not 1 <= axis <= len(p.x):
        raise ValueError(f"axis must be in [1, {len(p.x)}], got {axis}")
    return math.asinh(abs(p.x[axis - 1]) / p.z)


def horobox_diameter(box: Horobox, d: int | None = None) -> float:
    """Diameter of a cube-based horobox; depends only on (w, h, d)."""
    if d is None:
        d = box.dim
    return _diameter(box.w, box.h, d)


def _diameter(w: float, h: float, d: int) -> float:
    k = d - 1
    grow = math.expm1(h * _LN2)  # 2^h - 1
    if w * w * k >= grow:
        return 2.0 * math.asinh(0.5 * w * math.sqrt(k))
    return 2.0 * math.asinh(0.5 * math.sqrt((k * w * w + grow * grow) / (grow + 1.0)))


def horobox_contains(box: Horobox, p: Point, closed: bool = False) -> bool:
    """Membership in the half-open box [x, x + zw)^(d-1) x [z, z 2^h).

    With ``closed=True`` the upper faces are included as well.
    """
    if len(box.x) != len(p.x):
        raise ValueError("box and point dimensions differ")
    ew = box.euclidean_width
    top = box.top
    if closed:
        if not box.z <= p.z <= top:
            return False
        return all(lo <= v <= lo + ew for lo, v in zip(box.x, p.x))
    if not box.z <= p.z < top:
        return False
    return all(lo <= v < lo + ew for lo, v in zip(box.x, p.x))


def minimum_bounding_horobox(points: Iterable[Point]) -> Horobox:
    pts: Sequence[Point] = list(points)
    if not pts:
        raise ValueError("cannot bound an empty point set")
    k = len(pts[0].x)
    for p in pts:
        if len(p.x) != k:
            raise ValueError("points of mixed dimension")
    lo = [min(p.x[i] for p in pts) for i in range(k)]
    hi = [max(p.x[i] for p in pts) for i in range(k)]
    zmin = min(p.z for p in pts)
    zmax = max(p.z for p in pts)
    extent = max(b - a for a, b in zip(lo, hi))
    w = max(extent / zmin, EPS_BOX)
    while any(a + zmin * w < b for a, b in zip(lo, hi)):
        w = math.nextafter(w, math.inf)
    h = max(math.log2(zmax / zmin), EPS_BOX)
    while zmin * 2.0 ** h < zmax:
        h = math.nextafter(h, math.inf)
    return Horobox(tuple(lo), zmin, w, h)
