"""Measurements shared by the ``validate`` command and the acceptance suite.

Each sweep is deterministic for a given seed.  Thresholds come from
``data/frozen_constants.json`` (see :func:`frozen_constants`).
"""

from __future__ import annotations

import json
import math
import time
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .cover import covering_ratio, shift_family
from .geometry import Point, distance
from .nnindex import NeighborIndex, brute_force_closest_pair, brute_force_nearest, max_delta
from .quadtree import child_diameter_ratio, fatness_at
from .sampling import ball_point, sample_ball

__all__ = [
    "frozen_constants",
    "random_alpha",
    "sample_pair",
    "covering_sweep",
    "descent_sweep",
    "fatness_sweep",
    "nearest_ratios",
    "closest_pair_ratio",
    "summarize",
    "linear_fit",
    "query_scaling",
]

# base heights of covering pairs: log2 z in this band (see covering_sweep)
COVER_LOG2_Z = (-8.0, 0.0)
COVER_X_SPAN = 4.0


@lru_cache(maxsize=None)
def frozen_constants() -> dict:
    text = resources.files("hyperquad").joinpath("data/frozen_constants.json").read_text("utf-8")
    return json.loads(text)


def random_alpha(rng: np.random.Generator, level: int) -> float:
    """Width factor of a random cell at a negative ``level`` (1 otherwise)."""
    alpha = 1.0
    for k in range(1, -level + 1):
        if rng.random() < 0.5:
            alpha *= 2.0 ** -(2.0 ** -k)
    return alpha


def sample_pair(rng: np.random.Generator, d: int, delta: float) -> tuple[Point, Point]:
    """A base point and a second point at distance uniform in ``(0, delta]``."""
    lo, hi = COVER_LOG2_Z
    base = Point(
        tuple(float(v) for v in rng.uniform(-COVER_X_SPAN, COVER_X_SPAN, d - 1)),
        2.0 ** float(rng.uniform(lo, hi)),
    )
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    r = delta * (1.0 - float(rng.random()))
    return base, ball_point(u, r, base)


def covering_sweep(
    dims: Sequence[int], deltas: Sequence[float], pairs: int, seed: int
) -> list[dict]:
    """Covering ratio statistics per ``(d, delta)``.

    Base points have ``log2 z`` in :data:`COVER_LOG2_Z`: the shift family
    is fixed, so cells far above ``z = 1`` (``log2 z`` beyond about ``H/2``)
    are not covered by the scale argument.
    """
    out = []
    for d in dims:
        for delta in deltas:
            rng = np.random.default_rng([seed, d, int(delta * 1000)])
            family = shift_family(delta, d)
            worst = 0.0
            infinite = 0
            measured = 0
            for _ in range(pairs):
                p, q = sample_pair(rng, d, delta)
                dist = distance(p, q)
                if not 0.0 < dist <= delta:
                    continue
                try:
                    r = covering_ratio(family, p, q)
                except ValueError:
                    continue
                measured += 1
                if math.isinf(r):
                    infinite += 1
                else:
                    worst = max(worst, r)
            out.append(
                {
                    "d": d,
                    "delta": delta,
                    "pairs": measured,
                    "infinite": infinite,
                    "max_ratio": worst,
                    "max_ratio_over_d_sqrt_d": worst / (d * math.sqrt(d)),
                }
            )
    return out


def descent_sweep(samples: int, seed: int, levels: tuple[int, int] = (-20, 6)) -> tuple[float, float]:
    """(min, max) child/parent diameter ratio over random admissible descents."""
    rng = np.random.default_rng(seed)
    lo, hi = math.inf, -math.inf
    for _ in range(samples):
        level = int(rng.integers(levels[0], levels[1] + 1))
        alpha = random_alpha(rng, level)
        child = alpha
        if level <= 0 and rng.random() < 0.5:
            child = alpha * 2.0 ** -(2.0 ** (level - 1))
        r = child_diameter_ratio(level, alpha, child)
        lo, hi = min(lo, r), max(hi, r)
    return lo, hi


def fatness_sweep(samples: int, seed: int, levels=(-10, 6), dims=range(2, 11)) -> float:
    """Smallest ``fatness * sqrt(d)`` over random cells and the narrowest cells."""
    rng = np.random.default_rng(seed)
    dims = list(dims)
    best = math.inf
    for d in dims:
        for level in range(levels[0], levels[1] + 1):
            # narrowest admissible cell at this level
            alpha = math.prod(2.0 ** -(2.0 ** -k) for k in range(1, -level + 1))
            best = min(best, fatness_at(level, alpha, d) * math.sqrt(d))
            best = min(best, fatness_at(level, 1.0, d) * math.sqrt(d))
    for _ in range(samples):
        d = dims[int(rng.integers(len(dims)))]
        level = int(rng.integers(levels[0], levels[1] + 1))
        best = min(best, fatness_at(level, random_alpha(rng, level), d) * math.sqrt(d))
    return best


def nearest_ratios(index: NeighborIndex, points: Sequence[Point], queries: Sequence[Point]) -> list[float]:
    """distance(q, index answer) / exact nearest distance, per query.

    Queries coinciding with a data point give ratio 1 when answered exactly
    and ``inf`` otherwise.
    """
    out = []
    for q in queries:
        got = distance(q, index.nearest(q))
        best = distance(q, brute_force_nearest(points, q))
        if best == 0.0:
            out.append(1.0 if got == 0.0 else math.inf)
        else:
            out.append(got / best)
    return out


def closest_pair_ratio(index: NeighborIndex, points: Sequence[Point]) -> float:
    a, b = index.closest_pair()
    c, e = brute_force_closest_pair(points)
    return distance(a, b) / distance(c, e)


def summarize(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"count": 0}
    return {
        "count": int(arr.size),
        "min": float(arr.min()),
        "max": float(arr.max()),
        "mean": float(arr.mean()),
        "p50": float(np.quantile(arr, 0.5)),
        "p99": float(np.quantile(arr, 0.99)),
    }


def linear_fit(x: Sequence[float], y: Sequence[float]) -> dict:
    """Least-squares line ``y = slope x + intercept`` and its R^2."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    total = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / total if total > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def query_scaling(
    d: int, exponents: Sequence[int], queries: int, seed: int, delta: float | None = None, radius: float = 3.0
) -> dict:
    """Comparator calls and latency of ``nearest`` as the index grows.

    One ball sample of ``2**max(exponents)`` points is drawn; the index for
    ``n = 2**e`` holds its first ``n`` points.  Every size answers the same
    queries.  Returns per-size medians and a fit of the mean comparator
    count against ``log2 n``.
    """
    rng = np.random.default_rng([seed, d])
    top = max(exponents)
    pts = sample_ball(rng, 1 << top, d, radius)
    qs = sample_ball(rng, queries, d, radius)
    if delta is None:
        delta = max_delta(d)
    rows = []
    for e in sorted(exponents):
        index = NeighborIndex.build(pts[: 1 << e], delta)
        counts = []
        times = []
        for q in qs:
            index.reset_counters()
            t0 = time.perf_counter_ns()
            index.nearest(q)
            times.append(time.perf_counter_ns() - t0)
            counts.append(index.comparisons)
        rows.append(
            {
                "n": 1 << e,
                "mean_comparisons": float(np.mean(counts)),
                "median_comparisons": float(np.median(counts)),
                "query_ns_p50": float(np.quantile(times, 0.5)),
                "query_ns_p99": float(np.quantile(times, 0.99)),
            }
        )
    logs = [math.log2(r["n"]) for r in rows]
    return {
        "delta": delta,
        "sizes": rows,
        "comparison_fit": linear_fit(logs, [r["mean_comparisons"] for r in rows]),
        "latency_fit": linear_fit(logs, [r["query_ns_p50"] for r in rows]),
    }
