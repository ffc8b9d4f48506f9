"""Hyperbolic quadtrees in the half-space model.

Two kinds of trees live here:

* the finite quadtree of a point set, whose root hugs the points
  (:func:`root_cell`, :func:`build`);
* cells of the infinite quadtree, addressed by integer coordinates
  (:func:`infinite_cell`), and a finite tree made of those aligned cells
  (:func:`build_aligned`) whose depth-first order is the reference L-order.

Level ``l >= 0`` cells of the infinite quadtree have height ``2**l`` and
width ``2**(2**l - 1) / sqrt(d - 1)``; in transformed coordinates
``(x * sqrt(d - 1), log2 z)`` the cell ``(a, b)`` covers
``log2 z in [b 2^l, (b + 1) 2^l)`` and ``x~_i in [a_i 2^L, (a_i + 1) 2^L)``
with ``L = b 2^l + 2^l - 1``.  Below level 0 each level-0 tile is cut like a
Euclidean quadtree of its transformed image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .fixedpoint import FRAC_BITS, Z_LEVELS, FixedVector, floor_shift, transform
from .geometry import Horobox, Point, arsinh_exp2, horobox_diameter, minimum_bounding_horobox

__all__ = [
    "MIN_LEVEL",
    "TABLE1",
    "CellAddress",
    "CellGeometry",
    "QuadtreeNode",
    "Quadtree",
    "root_cell",
    "subdivide",
    "build",
    "build_aligned",
    "tile_index",
    "cell_address",
    "infinite_cell",
    "cell_horobox",
    "cell_geometry",
    "geometry_at",
    "diameter_at",
    "width_at",
    "child_diameter_ratio",
    "table1",
    "fatness",
    "fatness_at",
    "child_count",
    "dfs_order",
    "zorder_rank",
]

F = FRAC_BITS
MIN_LEVEL = -60
_LN2 = math.log(2.0)

# (parent level, parent alpha, child alpha, tabulated ratio, tolerance)
TABLE1 = [
    (-1, 2 ** -0.5, 2 ** -0.75, 0.485, 5e-4),
    (-1, 2 ** -0.5, 2 ** -0.5, 0.5218, 5e-5),
    (-1, 1.0, 2 ** -0.25, 0.4795, 5e-5),
    (-1, 1.0, 1.0, 0.5312, 5e-5),
    (0, 1.0, 2 ** -0.5, 0.4718, 5e-5),
    (0, 1.0, 1.0, 0.5605, 5e-5),
    (1, 1.0, 1.0, 0.526, 5e-4),
    (2, 1.0, 1.0, 0.4208, 5e-5),
    (3, 1.0, 1.0, 0.4317, 5e-5),
]


@dataclass(frozen=True)
class CellAddress:
    """Integer address of a cell of the infinite quadtree.

    For ``level < 0``, ``(a, b)`` names the enclosing level-0 tile and
    ``sub`` lists the child indices taken on the way down (bit ``i`` of a
    child index is the upper/lower half along axis ``i + 1``; the top bit is
    the vertical half).
    """

    level: int
    a: tuple[int, ...]
    b: int
    sub: tuple[int, ...] = ()


@dataclass(frozen=True)
class CellGeometry:
    level: int
    width: float
    height: float
    alpha: float
    diameter: float


# ---------------------------------------------------------------------------
# infinite quadtree


def tile_index(fv: FixedVector) -> tuple[tuple[int, ...], int]:
    """Level-0 tile ``(a, b)`` holding an encoded point."""
    b = fv[-1] >> F
    s = F + b
    return tuple(floor_shift(v, s) for v in fv[:-1]), b


def _child_below_tile(fv: FixedVector, b: int, step: int) -> int:
    # step k cuts at bit -k of the tile-normalised coordinates
    c = 0
    for i in range(len(fv) - 1):
        c |= (floor_shift(fv[i], F + b - step) & 1) << i
    c |= (floor_shift(fv[-1], F - step) & 1) << (len(fv) - 1)
    return c


def cell_address(fv: FixedVector, level: int) -> CellAddress:
    if level >= 0:
        b = fv[-1] >> (F + level)
        top = (b << level) + (1 << level) - 1
        return CellAddress(level, tuple(floor_shift(v, F + top) for v in fv[:-1]), b)
    a, b = tile_index(fv)
    sub = tuple(_child_below_tile(fv, b, k) for k in range(1, 1 - level))
    return CellAddress(level, a, b, sub)


def cell_horobox(addr: CellAddress, d: int) -> Horobox:
    root = math.sqrt(d - 1)
    level = addr.level
    if level >= 0:
        span = 1 << level
        top = addr.b * span + span - 1
        zb = math.ldexp(1.0, addr.b * span)
        x = tuple(math.ldexp(float(a), top) / root for a in addr.a)
        return Horobox(x, zb, math.ldexp(1.0, span - 1) / root, float(span))
    n = -level
    a = [v << n for v in addr.a]
    c = addr.b << n
    for k, child in enumerate(addr.sub, 1):
        for i in range(d - 1):
            a[i] |= (child >> i & 1) << (n - k)
        c |= (child >> (d - 1) & 1) << (n - k)
    zb = 2.0 ** math.ldexp(float(c), level)
    side = math.ldexp(1.0, addr.b + level) / root
    x = tuple(math.ldexp(float(v), addr.b + level) / root for v in a)
    return Horobox(x, zb, side / zb, math.ldexp(1.0, level))


def infinite_cell(p: Point, level: int) -> tuple[CellAddress, Horobox]:
    """The level-``level`` cell of the infinite quadtree containing ``p``."""
    addr = cell_address(transform(p), level)
    return addr, cell_horobox(addr, p.dim)


def _alpha(addr: CellAddress, d: int) -> float:
    # product of the per-step width factors picked up in upper halves
    alpha = 1.0
    for k, child in enumerate(addr.sub, 1):
        if child >> (d - 1) & 1:
            alpha *= 2.0 ** -(2.0 ** -k)
    return alpha


def width_at(level: int, alpha: float, d: int) -> float:
    root = math.sqrt(d - 1)
    if level >= 0:
        try:
            return math.ldexp(1.0, (1 << level) - 1) / root
        except OverflowError:
            return math.inf
    return alpha * math.ldexp(1.0, level) / root


def diameter_at(level: int, alpha: float = 1.0) -> float:
    """Diameter of a level-``level`` cell (independent of the dimension)."""
    if level >= 0:
        return 2.0 * arsinh_exp2((1 << level) - 2)
    t = math.ldexp(1.0, level)
    g = math.expm1(t * _LN2)
    num = alpha * alpha * t * t + g * g
    return 2.0 * math.asinh(0.5 * math.sqrt(num / (g + 1.0)))


def geometry_at(level: int, alpha: float, d: int) -> CellGeometry:
    if level >= 0:
        alpha = 1.0
    elif not 0.5 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (1/2, 1], got {alpha}")
    return CellGeometry(
        level, width_at(level, alpha, d), math.ldexp(1.0, level), alpha, diameter_at(level, alpha)
    )


def cell_geometry(addr: CellAddress, d: int) -> CellGeometry:
    return geometry_at(addr.level, _alpha(addr, d) if addr.level < 0 else 1.0, d)


def child_diameter_ratio(level: int, alpha: float = 1.0, alpha_child: float | None = None) -> float:
    """diam(child) / diam(parent) for a parent cell at ``level``."""
    if level >= 1:
        return diameter_at(level - 1) / diameter_at(level)
    if level == 0 and alpha != 1.0:
        raise ValueError("level-0 cells have alpha = 1")
    if alpha_child is None:
        alpha_child = alpha
    step = 2.0 ** -(2.0 ** (level - 1))
    q = alpha_child / alpha
    if not (math.isclose(q, 1.0, rel_tol=1e-12) or math.isclose(q, step, rel_tol=1e-12)):
        raise ValueError(f"child alpha ratio {q} is not 1 or {step}")
    return diameter_at(level - 1, alpha_child) / diameter_at(level, alpha)


def table1() -> list[dict]:
    rows = []
    for level, alpha, alpha_child, expected, tol in TABLE1:
        got = child_diameter_ratio(level, alpha, alpha_child)
        rows.append(
            {
                "level": level,
                "alpha": alpha,
                "alpha_child": alpha_child,
                "expected": expected,
                "computed": got,
                "tolerance": tol,
                "pass": abs(got - expected) <= tol,
            }
        )
    return rows


def _log1p_width(level: int, w: float, d: int) -> float:
    if math.isfinite(w):
        return math.log1p(w)
    return ((1 << level) - 1) * _LN2 - 0.5 * math.log(d - 1)


def fatness_at(level: int, alpha: float, d: int) -> float:
    """Inscribed-ball diameter over twice the cell diameter."""
    g = geometry_at(level, alpha, d)
    inscribed = min(g.height * _LN2, _log1p_width(level, g.width, d))
    return inscribed / (2.0 * g.diameter)


def fatness(cell: Horobox) -> float:
    inscribed = min(cell.h * _LN2, math.log1p(cell.w))
    return inscribed / (2.0 * horobox_diameter(cell))


def child_count(level: int, d: int) -> int:
    if level <= 0:
        return 1 << d
    return (1 << ((1 << (level - 1)) * (d - 1))) + 1


def zorder_rank(g: Sequence[int]) -> int:
    """Z-order rank of a non-negative grid index by explicit bit interleaving.

    Axis 1 is the least significant axis inside every bit group.
    """
    k = len(g)
    out = 0
    nbits = max((v.bit_length() for v in g), default=0)
    for bit in range(nbits):
        for i, v in enumerate(g):
            out |= (v >> bit & 1) << (bit * k + i)
    return out


# top-level indices are below 2**128 in magnitude; one common bias keeps
# the ranks of negative and non-negative indices comparable
_INDEX_BIAS = 1 << 130


def _signed_zorder_rank(a: Sequence[int]) -> int:
    return zorder_rank([v + _INDEX_BIAS for v in a])


# ---------------------------------------------------------------------------
# trees


@dataclass(eq=False)
class QuadtreeNode:
    cell: Horobox | None
    level: int | None
    children: list["QuadtreeNode"] = field(default_factory=list)
    points: list[Point] = field(default_factory=list)
    size: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(eq=False)
class Quadtree:
    root: QuadtreeNode
    points: list[Point]
    aligned: bool = False

    def nodes(self) -> Iterator[QuadtreeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> Iterator[QuadtreeNode]:
        return (n for n in self.nodes() if n.is_leaf)

    def dfs_order(self) -> list[Point]:
        return dfs_order(self)


def dfs_order(tree: Quadtree) -> list[Point]:
    """Points in depth-first order; children are stored in visiting order."""
    out: list[Point] = []
    for node in tree.nodes():
        if node.is_leaf:
            out.extend(node.points)
    return out


def root_cell(points: Iterable[Point]) -> tuple[Horobox, int]:
    """Root horobox of the finite quadtree and its level."""
    pts = list(points)
    box = minimum_bounding_horobox(pts)
    d = box.dim
    root = math.sqrt(d - 1)
    w, h = box.w, box.h
    if w <= 1.0 / root and h <= 1.0:
        level = 0
        while w <= math.ldexp(1.0, level - 1) / root and h <= math.ldexp(1.0, level - 1):
            level -= 1
        size = math.ldexp(1.0, level)
        return Horobox(box.x, box.z, size / root, size), level
    level = 1
    while not (w <= width_at(level, 1.0, d) and h <= math.ldexp(1.0, level)):
        level += 1
    return Horobox(box.x, box.z, width_at(level, 1.0, d), math.ldexp(1.0, level)), level


def subdivide(cell: Horobox) -> list[Horobox]:
    """Children of a quadtree cell in depth-first visiting order."""
    d = cell.dim
    h = cell.h
    if h <= 1.0:
        zt = cell.z * 2.0 ** (h / 2)
        half = cell.euclidean_width / 2
        out = []
        for c in range(1 << d):
            zc = zt if c >> (d - 1) & 1 else cell.z
            x = tuple(v + (half if c >> i & 1 else 0.0) for i, v in enumerate(cell.x))
            out.append(Horobox(x, zc, half / zc, h / 2))
        return out
    half_h = int(h) // 2
    m = 1 << half_h
    count = m ** (d - 1)
    if count > 1 << 20:
        raise ValueError(f"refusing to materialise {count + 1} children")
    out = [Horobox(cell.x, cell.z * 2.0 ** half_h, cell.w / m, h / 2)]
    step = cell.euclidean_width / m
    for t in range(count):
        g = _deinterleave(t, d - 1)
        out.append(
            Horobox(tuple(v + gi * step for v, gi in zip(cell.x, g)), cell.z, cell.w / m, h / 2)
        )
    return out


def _deinterleave(t: int, k: int) -> tuple[int, ...]:
    g = [0] * k
    bit = 0
    while t:
        for i in range(k):
            g[i] |= (t & 1) << bit
            t >>= 1
        bit += 1
    return tuple(g)


class _Frame:
    """Finite-tree bookkeeping in exact coordinates relative to the root.

    Horizontal offsets are in units of the root's Euclidean width and
    vertical offsets in log2 units above the root base, so every cell
    boundary is a dyadic rational.
    """

    def __init__(self, box: Horobox):
        self.x0 = box.x
        self.z0 = box.z
        self.e0 = box.euclidean_width
        self.lz0 = Fraction(math.log2(box.z))
        self.fx0 = [Fraction(v) for v in box.x]
        self.fe0 = Fraction(self.e0)

    def relative(self, p: Point) -> tuple[tuple[Fraction, ...], Fraction]:
        rx = tuple((Fraction(v) - a) / self.fe0 for v, a in zip(p.x, self.fx0))
        return rx, Fraction(math.log2(p.z)) - self.lz0

    def horobox(self, qx, qz: Fraction, e: Fraction, h: Fraction) -> Horobox:
        zb = self.z0 * 2.0 ** float(qz)
        x = tuple(a + self.e0 * float(q) for a, q in zip(self.x0, qx))
        return Horobox(x, zb, self.e0 * float(e) / zb, float(h))


def build(points: Iterable[Point], min_level: int = MIN_LEVEL) -> Quadtree:
    """Finite hyperbolic quadtree: split cells until leaves hold <= 1 point.

    Points on the upper faces of the root are kept in the last child, so the
    root is closed on top; every other cell is half-open.
    """
    pts = list(points)
    if not pts:
        raise ValueError("cannot build a quadtree over no points")
    if len({p.coords for p in pts}) != len(pts):
        raise ValueError("duplicate points cannot be separated")
    box, level = root_cell(pts)
    frame = _Frame(box)
    items = [(frame.relative(p), p) for p in pts]
    k = box.dim - 1
    zero = Fraction(0)
    root = _grow(frame, items, (zero,) * k, zero, Fraction(1), Fraction(box.h), level, min_level)
    return Quadtree(root, pts)


def _grow(frame, items, qx, qz, e, h, level, min_level) -> QuadtreeNode:
    node = QuadtreeNode(frame.horobox(qx, qz, e, h), level, size=len(items))
    if len(items) <= 1:
        node.points = [p for _, p in items]
        return node
    if level <= min_level:
        raise ValueError(f"points not separated at the depth floor (level {min_level})")
    k = len(qx)
    groups: dict = {}
    if h <= 1:
        he, hh = e / 2, h / 2
        for item in items:
            (rx, rz), _ = item
            c = 0
            for i in range(k):
                if rx[i] >= qx[i] + he:
                    c |= 1 << i
            if rz >= qz + hh:
                c |= 1 << k
            groups.setdefault(c, []).append(item)
        for c in sorted(groups):
            cx = tuple(q + (he if c >> i & 1 else 0) for i, q in enumerate(qx))
            cz = qz + (hh if c >> k & 1 else 0)
            node.children.append(_grow(frame, groups[c], cx, cz, he, hh, level - 1, min_level))
        return node
    hh = h / 2
    m = 1 << int(hh)
    ce = e / m
    for item in items:
        (rx, rz), _ = item
        if rz >= qz + hh:
            key = (0,)
        else:
            g = tuple(min(max(math.floor((rx[i] - qx[i]) / ce), 0), m - 1) for i in range(k))
            key = (1, zorder_rank(g), g)
        groups.setdefault(key, []).append(item)
    for key in sorted(groups):
        if key[0] == 0:
            # the top child keeps the parent's Euclidean width
            child = _grow(frame, groups[key], qx, qz + hh, e, hh, level - 1, min_level)
        else:
            cx = tuple(q + gi * ce for q, gi in zip(qx, key[2]))
            child = _grow(frame, groups[key], cx, qz, ce, hh, level - 1, min_level)
        node.children.append(child)
    return node


def build_aligned(points: Iterable[Point]) -> Quadtree:
    """Tree of infinite-quadtree cells over ``points``.

    The hyperplanes ``x_i = 0`` and the horosphere ``z = 1`` bound cells at
    every level, so points may have no common cell.  The root is then a
    virtual node whose children are the level-``Z_LEVELS`` cells in use,
    ordered upper z-range first and then by Z-order of their horizontal
    index.  Leaves hold one point, or several with identical encodings.
    """
    pts = list(points)
    items = [(transform(p), p) for p in pts]
    groups: dict = {}
    for fv, p in items:
        groups.setdefault(cell_address(fv, Z_LEVELS), []).append((fv, p))
    order = sorted(groups, key=lambda ad: (-ad.b, _signed_zorder_rank(ad.a)))
    root = QuadtreeNode(None, None, size=len(items))
    for addr in order:
        root.children.append(_grow_aligned(groups[addr], addr, len(pts[0].x) + 1))
    return Quadtree(root, pts, aligned=True)


def _grow_aligned(items, addr: CellAddress, d: int) -> QuadtreeNode:
    node = QuadtreeNode(cell_horobox(addr, d), addr.level, size=len(items))
    if len(items) <= 1 or all(fv == items[0][0] for fv, _ in items):
        node.points = [p for _, p in items]
        return node
    level = addr.level
    groups: dict = {}
    if level >= 1:
        span = 1 << (level - 1)
        for fv, p in items:
            child = cell_address(fv, level - 1)
            if child.b == 2 * addr.b + 1:
                key = (0,)
            else:
                g = tuple(ca - (pa << span) for ca, pa in zip(child.a, addr.a))
                key = (1, zorder_rank(g))
            groups.setdefault(key, (child, []))[1].append((fv, p))
    else:
        step = 1 - level
        for fv, p in items:
            c = _child_below_tile(fv, addr.b, step)
            if c not in groups:
                groups[c] = (CellAddress(level - 1, addr.a, addr.b, addr.sub + (c,)), [])
            groups[c][1].append((fv, p))
    for key in sorted(groups):
        child, members = groups[key]
        node.children.append(_grow_aligned(members, child, d))
    return node
