"""Random point generators for tests, validation and benchmarks."""

from __future__ import annotations

import math

import numpy as np

from .geometry import Point

__all__ = ["radius_cdf", "sample_radii", "sample_ball", "sample_box", "ball_point"]

_GRID = 1 << 14
_MAX_RADIUS = 700.0


def _check_dim(d: int) -> None:
    if d < 2:
        raise ValueError("d must be at least 2")


def radius_cdf(radius: float, d: int, grid: int = _GRID) -> tuple[np.ndarray, np.ndarray]:
    """Tabulated CDF of the distance from the centre of a uniform ball.

    The density is proportional to ``sinh(r)**(d - 1)`` on ``[0, radius]``;
    it is integrated with the trapezoid rule after dividing by its maximum.
    """
    _check_dim(d)
    if not 0 < radius <= _MAX_RADIUS:
        raise ValueError(f"radius must be in (0, {_MAX_RADIUS}], got {radius!r}")
    r = np.linspace(0.0, radius, grid + 1)
    with np.errstate(divide="ignore"):
        log_sinh = np.log(np.sinh(r))
    dens = np.exp((d - 1) * (log_sinh - math.log(math.sinh(radius))))
    cdf = np.concatenate(([0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(r))))
    cdf /= cdf[-1]
    return r, cdf


def sample_radii(rng: np.random.Generator, n: int, radius: float, d: int) -> np.ndarray:
    r, cdf = radius_cdf(radius, d)
    return np.interp(rng.random(n), cdf, r)


def ball_point(direction: np.ndarray, r: float, center: Point | None = None) -> Point:
    """Point at distance ``r`` from ``center`` along a unit ``direction``.

    Directions are taken at ``(0, ..., 0, 1)``; the last component is
    vertical.  The result is moved to ``center`` by the isometry
    ``(x, z) -> (z_c x + x_c, z_c z)``.
    """
    u = np.asarray(direction, dtype=float)
    uz = float(u[-1])
    a = ((1.0 - uz) * math.exp(r) + (1.0 + uz) * math.exp(-r)) / 2.0
    z = 1.0 / a
    x = [float(v) * math.sinh(r) * z for v in u[:-1]]
    if center is None:
        return Point(tuple(x), z)
    return Point(tuple(center.z * v + c for v, c in zip(x, center.x)), center.z * z)


def sample_ball(
    rng: np.random.Generator, n: int, d: int, radius: float, center: Point | None = None
) -> list[Point]:
    """``n`` points uniform in the hyperbolic ball of ``radius`` about ``center``."""
    _check_dim(d)
    if n < 0:
        raise ValueError("n must be non-negative")
    radii = sample_radii(rng, n, radius, d)
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return [ball_point(dirs[i], float(radii[i]), center) for i in range(n)]


def sample_box(rng: np.random.Generator, n: int, d: int, width: float, height: float) -> list[Point]:
    """``n`` points uniform in the Euclidean box ``[0, width]^(d-1) x [1, 2**height]``."""
    _check_dim(d)
    if not width > 0 or not height > 0:
        raise ValueError("box width and height must be positive")
    xs = rng.uniform(0.0, width, (n, d - 1))
    zs = rng.uniform(1.0, 2.0 ** height, n)
    return [Point(tuple(float(v) for v in xs[i]), float(zs[i])) for i in range(n)]
