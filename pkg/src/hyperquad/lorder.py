"""The L-order: depth-first order of the infinite hyperbolic quadtree.

Points are compared on their fixed-point encodings (see :mod:`fixedpoint`).
Two points sharing a level-0 tile are ordered by the Euclidean Z-order of
their tile-normalised coordinates; otherwise either a horosphere separates
them inside their smallest common z-range cell (the upper one comes first)
or the Z-order of the horizontal coordinates decides.

:func:`fixed_key` produces a sort key that orders exactly like
:func:`compare_fixed`; it is what the ordered collections use.
"""

from __future__ import annotations

import math
from enum import IntEnum
from functools import lru_cache

from .fixedpoint import FRAC_BITS, FixedVector, floor_shift, msb_split_index, transform
from .geometry import Isometry, Point, apply_isometry

__all__ = [
    "Ordering",
    "transform",
    "zorder_compare",
    "compare_fixed",
    "lorder_compare",
    "shifted_compare",
    "fixed_key",
    "lorder_key",
    "shifted_key",
    "family_keys",
    "shifted_keys",
]

F = FRAC_BITS
_NEG_INF = -math.inf
_INF = math.inf


class Ordering(IntEnum):
    BEFORE = -1
    EQUAL = 0
    AFTER = 1


def zorder_compare(u, v, offsets=None) -> Ordering:
    """Z-order of two integer vectors (axis 1 least significant).

    ``offsets`` shifts the split level of each axis, which compares the
    vectors as if axis ``i`` had been scaled by ``2**-offsets[i]``.
    """
    if len(u) != len(v):
        raise ValueError("vectors of different length")
    best = _NEG_INF
    axis = -1
    for i in range(len(u)):
        m = msb_split_index(u[i], v[i])
        if m == _NEG_INF:
            continue
        if offsets is not None:
            m += offsets[i]
        if m >= best:
            best, axis = m, i
    if axis < 0:
        return Ordering.EQUAL
    return Ordering.BEFORE if u[axis] < v[axis] else Ordering.AFTER


def compare_fixed(u: FixedVector, v: FixedVector) -> Ordering:
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    if u == v:
        return Ordering.EQUAL
    k = len(u) - 1
    z, z2 = u[k], v[k]
    b = z >> F
    if b == z2 >> F and all(
        floor_shift(u[i], F + b) == floor_shift(v[i], F + b) for i in range(k)
    ):
        return zorder_compare(u, v, (-b,) * k + (0,))
    upper_first = Ordering.BEFORE if z > z2 else Ordering.AFTER
    lz = msb_split_index(z, z2)
    if lz == _INF:
        return upper_first
    lz = max(int(lz), 0) if lz != _NEG_INF else 0
    top = ((z >> (F + lz)) << lz) + (1 << lz) - 1
    if all(msb_split_index(u[i], v[i]) <= top for i in range(k)):
        return upper_first
    return zorder_compare(u[:k], v[:k])


def lorder_compare(p: Point, q: Point) -> Ordering:
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    return compare_fixed(transform(p), transform(q))


def shifted_compare(s: Isometry, p: Point, q: Point) -> Ordering:
    return lorder_compare(apply_isometry(s, p), apply_isometry(s, q))


# ---------------------------------------------------------------------------
# sort keys
#
# Every horizontal coordinate is biased to B = X + 2**126 (non-negative,
# below 2**127) and the biased values are bit-interleaved with stride d:
# bit k of axis i lands at k*d + i, slot d-1 of each group stays empty.
# Windows of that integer are exactly the Z-order ranks of grid indices.

_BIAS_BIT = 126
_CHUNK = 16


class _Spreader:
    def __init__(self, d: int):
        self.d = d
        table = [0] * (1 << _CHUNK)
        for bit in range(_CHUNK):
            step = 1 << bit
            add = 1 << (bit * d)
            for v in range(step, 1 << _CHUNK, step << 1):
                for w in range(v, v + step):
                    table[w] |= add
        self.table = table
        self.full = self.spread((1 << _BIAS_BIT) - 1)
        self.low = [self.spread((1 << t) - 1) for t in range(_BIAS_BIT + 1)]
        self.bias = 1 << (_BIAS_BIT * d)
        # z < 0 heads carry a marker above the coarse grid index
        self.w_head = (_BIAS_BIT + 2 - (F - 1)) * d

    def spread(self, v: int) -> int:
        table = self.table
        out = 0
        shift = 0
        step = _CHUNK * self.d
        while v:
            out |= table[v & 0xFFFF] << shift
            v >>= _CHUNK
            shift += step
        return out

    def biased(self, x: int) -> int:
        """spread(x + 2**126) using the sparsity of encoded doubles."""
        if x == 0:
            return self.bias
        if x > 0:
            t = (x & -x).bit_length() - 1
            return (self.spread(x >> t) << (t * self.d)) | self.bias
        y = -x
        t = (y & -y).bit_length() - 1
        # 2**126 + x is the 126-bit complement of |x| - 1
        return self.full ^ ((self.spread((y >> t) - 1) << (t * self.d)) | self.low[t])


@lru_cache(maxsize=None)
def _spreader(d: int) -> _Spreader:
    return _Spreader(d)


def _layout(d: int, b0: int) -> tuple:
    """Level fields (top to bottom) and tile width of a point in tile row b0.

    A top child is the single bit 0.  A bottom child is a marker bit 1 and
    its window of the interleaved x bits, clipped to the bits that can vary
    (``[0, 127)`` per axis): every key with the same fields so far has the
    same window, so dropping the constant bits keeps the order.
    """
    fields = []
    for lev in range(9, 0, -1):
        half = 1 << (lev - 1)
        if b0 >> (lev - 1) & 1:
            fields.append(None)
            continue
        lo = ((b0 >> lev) << lev) + half - 1 + F
        lo_c, hi_c = max(lo, 0), min(lo + half, _BIAS_BIT + 1)
        fields.append((lo_c * d, (hi_c - lo_c) * d) if hi_c > lo_c else (0, 0))
    tile = (F + b0) * d if b0 >= 0 else F * d
    return fields, tile


@lru_cache(maxsize=None)
def _body_width(d: int) -> int:
    best = 0
    for b0 in range(-256, 256):
        fields, tile = _layout(d, b0)
        best = max(best, tile + sum(1 if f is None else 1 + f[1] for f in fields))
    return best


@lru_cache(maxsize=None)
def _level_plan(d: int, b0: int) -> tuple:
    """Bit layout of the key body for a point whose tile row is b0.

    Returns ``(marks, steps, xmask, x_up, z_up)``: the marker bits, one
    ``(source shift, mask, target shift)`` triple per non-empty window, and
    the placement of the tile's x and z parts.  The body is left-aligned in
    :func:`_body_width` bits.
    """
    fields, tile = _layout(d, b0)
    used = tile + sum(1 if f is None else 1 + f[1] for f in fields)
    pos = _body_width(d) - used + tile
    marks = 0
    steps = []
    for field in reversed(fields):
        if field is None:
            pos += 1
            continue
        src, width = field
        if width:
            steps.append((src, (1 << width) - 1, pos))
        marks |= 1 << (pos + width)
        pos += width + 1
    pad = _body_width(d) - used
    xmask = (1 << ((F + b0) * d)) - 1 if F + b0 > 0 else 0
    x_up, z_up = (pad, pad + b0 * d) if b0 >= 0 else (pad - b0 * d, pad)
    return marks, tuple(steps), xmask, x_up, z_up


_FRAC_MASK = (1 << F) - 1


def fixed_key(u: FixedVector) -> int:
    """Sort key agreeing with :func:`compare_fixed` (equal keys iff Equal).

    The key packs, from the most significant end: the level-9 z-range and
    horizontal cell, one field per level 9..1 (zero for a top child, else a
    marker bit and the Z-order rank of the bottom child), and the Z-order
    rank inside the level-0 tile.
    """
    d = len(u)
    sp = _spreader(d)
    biased = sp.biased
    ix = 0
    for i in range(d - 1):
        ix |= biased(u[i]) << i
    z = u[-1]
    frac = z & _FRAC_MASK
    if frac:
        t = (frac & -frac).bit_length() - 1
        iz = sp.spread(frac >> t) << (t * d + d - 1)
    else:
        iz = 0
    return _assemble(ix, iz, z, d, sp)


def _assemble(ix: int, iz: int, z: int, d: int, sp: _Spreader) -> int:
    marks, steps, xmask, x_up, z_up = _level_plan(d, z >> F)
    levels = marks
    for src, mask, dst in steps:
        levels |= ((ix >> src) & mask) << dst
    tile = ((ix & xmask) << x_up) | (iz << z_up)
    if z >= 0:
        # upper half of level 9: only the orthant matters
        head = ix >> (_BIAS_BIT * d)
    else:
        head = (1 << sp.w_head) | (ix >> ((F - 1) * d))
    return (head << _body_width(d)) | levels | tile


def lorder_key(p: Point) -> int:
    return fixed_key(transform(p))


def shifted_key(s: Isometry, p: Point) -> int:
    return fixed_key(transform(apply_isometry(s, p)))


_X_RANGE = 2.0 ** 63
_ALMOST_ONE = 1.0 - 2.0 ** -53


def shifted_keys(s: Isometry, points) -> list:
    """``[shifted_key(s, p) for p in points]``, computed in bulk."""
    return family_keys([s], points)[0]


def family_keys(shifts, points) -> list:
    """One list of :func:`shifted_key` values per isometry in ``shifts``.

    The fixed-point bits are read straight off the doubles: a double
    ``n / 2**k`` with ``k <= 63`` encodes to ``n << (63 - k)``, and ``n``
    has at most 53 bits, so four table lookups spread it.  The vertical
    part is shared by shifts with the same scale.
    """
    points = list(points)
    shifts = list(shifts)
    if not points:
        return [[] for _ in shifts]
    d = points[0].dim
    root = math.sqrt(d - 1)
    for s in shifts:
        if len(s.tau) != d - 1:
            raise ValueError("isometry and point dimensions differ")
    groups: dict[float, list[int]] = {}
    for k, s in enumerate(shifts):
        groups.setdefault(s.sigma, []).append(k)
    sp = _spreader(d)
    tab = sp.table
    s1, s2, s3 = _CHUNK * d, 2 * _CHUNK * d, 3 * _CHUNK * d
    bias, full, low = sp.bias, sp.full, sp.low
    body = _body_width(d)
    neg_head = 1 << sp.w_head
    head_pos, head_neg = _BIAS_BIT * d, (F - 1) * d
    frexp, log2, ldexp, floor = math.frexp, math.log2, math.ldexp, math.floor
    axes = range(d - 1)
    plans = {}
    out = [[0] * len(points) for _ in shifts]
    for sigma, members in groups.items():
        taus = [(k, shifts[k].tau) for k in members]
        for idx, p in enumerate(points):
            x = p.x
            if len(x) != d - 1:
                raise ValueError("points of mixed dimension")
            # vertical part
            zs = sigma * p.z
            m, e = frexp(zs)
            if not -256 <= e - 1 < 256:
                raise ValueError(f"log2 z = {log2(zs)} is outside the supported range")
            frac = log2(2.0 * m)
            if frac >= 1.0:
                frac = _ALMOST_ONE
            if frac == 0.0:
                fr = iz = 0
            else:
                n, den = frac.as_integer_ratio()
                k = den.bit_length() - 1
                if k <= F:
                    fr = n << (F - k)
                    iz = (
                        tab[n & 0xFFFF]
                        | tab[(n >> 16) & 0xFFFF] << s1
                        | tab[(n >> 32) & 0xFFFF] << s2
                        | tab[n >> 48] << s3
                    ) << ((F - k) * d + d - 1)
                else:
                    fr = n >> (k - F)
                    t = (fr & -fr).bit_length() - 1 if fr else 0
                    iz = sp.spread(fr >> t) << (t * d + d - 1) if fr else 0
            b0 = e - 1
            z = (b0 << F) + fr
            plan = plans.get(b0)
            if plan is None:
                plan = plans[b0] = _level_plan(d, b0)
            marks, steps, xmask, x_up, z_up = plan
            ztile = iz << z_up
            scaled = [sigma * v for v in x]
            for k, tau in taus:
                ix = 0
                for i in axes:
                    v = (scaled[i] + tau[i]) * root
                    if not -_X_RANGE <= v < _X_RANGE:
                        raise ValueError(f"{v!r} is outside the fixed-point range")
                    if v == 0.0:
                        sv = bias
                    else:
                        n, den = v.as_integer_ratio()
                        kk = den.bit_length() - 1
                        if kk > F:
                            sv = sp.biased(floor(ldexp(v, F)))
                        elif n > 0:
                            sv = (
                                tab[n & 0xFFFF]
                                | tab[(n >> 16) & 0xFFFF] << s1
                                | tab[(n >> 32) & 0xFFFF] << s2
                                | tab[n >> 48] << s3
                            ) << ((F - kk) * d) | bias
                        else:
                            n = -n - 1
                            t = F - kk
                            sv = full ^ (
                                (
                                    tab[n & 0xFFFF]
                                    | tab[(n >> 16) & 0xFFFF] << s1
                                    | tab[(n >> 32) & 0xFFFF] << s2
                                    | tab[n >> 48] << s3
                                ) << (t * d)
                                | low[t]
                            )
                    ix |= sv << i
                levels = marks
                for src, mask, dst in steps:
                    levels |= ((ix >> src) & mask) << dst
                head = ix >> head_pos if z >= 0 else neg_head | (ix >> head_neg)
                out[k][idx] = (head << body) | levels | ((ix & xmask) << x_up) | ztile
    return out
