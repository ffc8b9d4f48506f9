"""Shift families that cover every ball of radius Delta with a small cell.

A family holds ``3 (D + 1)`` isometries ``T(sigma_i, tau_j)`` with
``sigma_i = 2**(H i / 3)`` (three offsets of the z-ranges) and
``tau_j = (W j / (D + 1), ...)`` (``D + 1`` diagonal offsets of the
horizontal grid), where ``D`` is ``d`` rounded down to an even number.
For any two points within distance Delta, one of the shifted copies of the
infinite quadtree has a common cell whose diameter is within an
``O(d sqrt d)`` factor of their distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .fixedpoint import FRAC_BITS, FixedVector, msb_split_index, transform
from .geometry import Isometry, Point, apply_isometry, distance
from .quadtree import CellAddress, CellGeometry, cell_address, cell_geometry

__all__ = [
    "ShiftFamily",
    "CommonCell",
    "level_for_delta",
    "shift_family",
    "smallest_common_cell",
    "common_level",
    "covering_ratio",
    "one_dim_shift",
    "central_shift",
]

F = FRAC_BITS
_LN2 = math.log(2.0)
# z-ranges at level >= 9 are [0, inf) and (-inf, 0); nothing merges above it
_SEARCH_TOP = 12


@dataclass(frozen=True)
class ShiftFamily:
    delta: float
    d: int
    L: int
    H: float
    W: float
    D: int
    shifts: tuple[Isometry, ...]

    def __len__(self) -> int:
        return len(self.shifts)


class CommonCell(NamedTuple):
    """Smallest common cell of two points.

    ``level`` is ``-inf`` for identical encodings (common at every level)
    and ``+inf`` when no cell holds both; ``address``/``geometry`` are then
    ``None``.
    """

    level: float
    address: CellAddress | None
    geometry: CellGeometry | None


def _log_expm1(x: float) -> float:
    # ln(e^x - 1) without overflow
    if x > 30:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def level_for_delta(delta: float, d: int) -> int:
    """Smallest L >= 0 whose cells contain a ball of radius ``delta``.

    Sufficient condition: height ``2**L ln 2 >= 2 delta`` and
    ``ln(W + 1) >= 2 delta`` with ``W = 2**(2**L - 1) / sqrt(d - 1)``.
    """
    if not delta > 0 or not math.isfinite(delta):
        raise ValueError(f"delta must be positive and finite, got {delta!r}")
    if d < 2:
        raise ValueError("d must be at least 2")
    need = _log_expm1(2.0 * delta)
    level = 0
    while True:
        span = 2.0 ** level
        log_w = (span - 1.0) * _LN2 - 0.5 * math.log(d - 1)
        if span * _LN2 >= 2.0 * delta and log_w >= need:
            return level
        level += 1


def shift_family(delta: float, d: int) -> ShiftFamily:
    level = level_for_delta(delta, d)
    height = 2.0 ** level
    try:
        width = math.ldexp(1.0, (1 << level) - 1) / math.sqrt(d - 1)
    except OverflowError:
        raise ValueError(f"delta = {delta} needs cells wider than a double") from None
    even = 2 * (d // 2)
    shifts = []
    for i in range(3):
        sigma = 2.0 ** (height * i / 3)
        for j in range(even + 1):
            shifts.append(Isometry(sigma, (width * j / (even + 1),) * (d - 1)))
    return ShiftFamily(delta, d, level, height, width, even, tuple(shifts))


def common_level(u: FixedVector, v: FixedVector) -> float:
    """Smallest level at which the encoded points share an infinite-quadtree cell."""
    if u == v:
        return -math.inf
    k = len(u) - 1
    z, z2 = u[k], v[k]
    xs = [msb_split_index(u[i], v[i]) for i in range(k)]
    b = z >> F
    if b == z2 >> F and all(m <= b for m in xs):
        # same level-0 tile: Euclidean quadtree on normalised coordinates
        level = msb_split_index(z, z2)
        for m in xs:
            level = max(level, m - b)
        return int(level)
    lz = msb_split_index(z, z2)
    if lz == math.inf:
        return math.inf
    start = 1 if lz == -math.inf else max(int(lz), 1)
    for level in range(start, _SEARCH_TOP + 1):
        top = ((z >> (F + level)) << level) + (1 << level) - 1
        if all(m <= top for m in xs):
            return level
    return math.inf


def smallest_common_cell(s: Isometry, p: Point, q: Point) -> CommonCell:
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    u = transform(apply_isometry(s, p))
    v = transform(apply_isometry(s, q))
    level = common_level(u, v)
    if math.isinf(level):
        return CommonCell(level, None, None)
    addr = cell_address(u, int(level))
    return CommonCell(level, addr, cell_geometry(addr, p.dim))


def covering_ratio(family: ShiftFamily, p: Point, q: Point) -> float:
    """min over shifts of diam(smallest common cell) / distance(p, q)."""
    dist = distance(p, q)
    if dist == 0.0 or p.coords == q.coords:
        raise ValueError("coincident points have no covering ratio")
    if dist > family.delta * (1.0 + 1e-12):
        raise ValueError(f"distance {dist} exceeds the family scale {family.delta}")
    best = math.inf
    measured = False
    for s in family.shifts:
        cell = smallest_common_cell(s, p, q)
        if cell.level == -math.inf:
            # indistinguishable after quantization under this shift
            continue
        measured = True
        if cell.geometry is not None:
            best = min(best, cell.geometry.diameter / dist)
    if not measured:
        raise ValueError("points are indistinguishable at fixed-point resolution")
    return best


def one_dim_shift(p: float, q: float, shifts=(Fraction(0), Fraction(1, 3), Fraction(2, 3))):
    """Witness for the one-dimensional shift property, in exact arithmetic.

    Looks for a shift ``s`` and a dyadic interval of the quadtree on
    ``[0, 2)`` with length below ``3 |p - q|`` that holds ``p + s`` and
    ``q + s`` and has ``min(p, q) + s`` in its lower third.  Returns
    ``(s, lo, length)`` or ``None``.
    """
    fp, fq = Fraction(p), Fraction(q)
    if not (0 <= fp < 1 and 0 <= fq < 1):
        raise ValueError("points must lie in [0, 1)")
    gap = abs(fp - fq)
    if gap == 0:
        raise ValueError("points must differ")
    lo_pt = min(fp, fq)
    for s in shifts:
        a, b = fp + s, fq + s
        length = Fraction(2)
        while length > 0:
            cell = math.floor(a / length)
            if math.floor(b / length) != cell:
                break
            start = cell * length
            if length < 3 * gap and lo_pt + s - start < length / 3:
                return s, start, length
            length /= 2
    return None


def central_shift(p: Sequence[float], level: int) -> int | None:
    """Smallest j with ``p + j/(m+1) (1, ..., 1)`` being ``1/(2m+2)``-central.

    ``m = len(p)`` must be even; cells are the grid of side ``2**-level``.
    Returns ``None`` if no ``j in {0, ..., m}`` works.
    """
    m = len(p)
    if m % 2:
        raise ValueError("centrality shifts need an even dimension")
    if level < 0:
        raise ValueError("level must be a natural number")
    side = Fraction(1, 1 << level)
    need = side / (2 * m + 2)
    coords = [Fraction(v) for v in p]
    for j in range(m + 1):
        off = Fraction(j, m + 1)
        ok = True
        for c in coords:
            r = (c + off) % side
            if min(r, side - r) < need:
                ok = False
                break
        if ok:
            return j
    return None
