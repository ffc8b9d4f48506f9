"""Fixed-point encoding of transformed coordinates.

A point ``(x, z)`` is mapped to ``(x * sqrt(d - 1), log2 z)`` and every
coordinate is quantized to a signed integer scaled by ``2**FRAC_BITS``
(floor rounding).  The resulting tuple of Python ints is a ``FixedVector``;
all bit logic downstream is exact on these integers.

Bit positions are expressed relative to the binary point: position 0 is the
units bit, position -1 the halves bit, and so on.
"""

from __future__ import annotations

import math
from typing import Tuple

from .geometry import Point

__all__ = [
    "FRAC_BITS",
    "INT_BITS",
    "Z_LEVELS",
    "FixedVector",
    "encode",
    "decode",
    "encode_log2",
    "transform",
    "transform_coords",
    "msb_split_index",
    "floor_shift",
]

INT_BITS = 64
FRAC_BITS = 63
# log2 z is restricted to (-2**(Z_LEVELS-1), 2**(Z_LEVELS-1)); level Z_LEVELS
# of the infinite quadtree then holds every point in one of two z-ranges.
Z_LEVELS = 9

_X_LIMIT = 1 << (INT_BITS - 1 + FRAC_BITS)
_Z_LIMIT = float(2 ** (Z_LEVELS - 1))
_ALMOST_ONE = 1.0 - 2.0 ** -53

FixedVector = Tuple[int, ...]


def encode(u: float) -> int:
    """Quantize a real to fixed point, rounding toward minus infinity."""
    if not math.isfinite(u):
        raise ValueError(f"cannot encode {u!r}")
    v = math.floor(math.ldexp(u, FRAC_BITS))
    if not -_X_LIMIT <= v < _X_LIMIT:
        raise ValueError(f"{u!r} is outside the fixed-point range")
    return v


def decode(v: int) -> float:
    return math.ldexp(v, -FRAC_BITS)


def encode_log2(z: float) -> int:
    """Fixed-point log2 z; the integer part comes straight from the exponent."""
    m, e = math.frexp(z)
    frac = math.log2(2.0 * m)
    if frac >= 1.0:
        frac = _ALMOST_ONE
    return ((e - 1) << FRAC_BITS) + math.floor(math.ldexp(frac, FRAC_BITS))


def transform_coords(x, z: float, root: float) -> FixedVector:
    """Encode raw coordinates; ``root`` is sqrt(d - 1)."""
    if not 0.0 < z < math.inf:
        raise ValueError(f"z must be positive, got {z!r}")
    out = [encode(v * root) for v in x]
    lz = encode_log2(z)
    if not -_Z_LIMIT <= decode(lz) < _Z_LIMIT:
        raise ValueError(f"log2 z = {math.log2(z)} is outside the supported range")
    out.append(lz)
    return tuple(out)


def transform(p: Point) -> FixedVector:
    """``(x * sqrt(d - 1), log2 z)`` as a fixed-point vector."""
    return transform_coords(p.x, p.z, math.sqrt(len(p.x)))


def msb_split_index(a: int, b: int) -> float:
    """Smallest k with floor(a / 2^k) == floor(b / 2^k).

    Returns ``-inf`` when ``a == b`` and ``+inf`` when the signs differ
    (no power of two puts a negative and a non-negative value in the same
    floor bucket).
    """
    x = a ^ b
    if x == 0:
        return -math.inf
    if x < 0:
        return math.inf
    return x.bit_length() - FRAC_BITS


def floor_shift(v: int, s: int) -> int:
    """floor(v / 2^s) for any integer s."""
    return v >> s if s >= 0 else v << -s
