import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import kstest

from hyperquad.geometry import Point, distance
from hyperquad.io import PointFileError, format_points, parse_points, read_points, write_points
from hyperquad.sampling import ball_point, radius_cdf, sample_ball, sample_box

ORIGIN2 = Point.of(0, 1)


def closed_form_cdf(d, big_r):
    if d == 2:
        return lambda r: (np.cosh(r) - 1) / (math.cosh(big_r) - 1)
    if d == 3:
        return lambda r: (np.sinh(2 * r) - 2 * r) / (math.sinh(2 * big_r) - 2 * big_r)
    raise ValueError(d)


@pytest.mark.parametrize("d", [2, 3])
def test_ball_radii_follow_the_volume_law(d):
    pts = sample_ball(np.random.default_rng(1), 100_000, d, 2.0)
    origin = Point((0.0,) * (d - 1), 1.0)
    radii = np.array([distance(origin, p) for p in pts])
    assert radii.max() <= 2.0 + 1e-9
    assert kstest(radii, closed_form_cdf(d, 2.0)).statistic < 0.02


def test_tabulated_cdf_matches_closed_form():
    r, cdf = radius_cdf(2.0, 2)
    assert np.max(np.abs(cdf - closed_form_cdf(2, 2.0)(r))) < 1e-7


def test_ball_directions_are_isotropic():
    pts = sample_ball(np.random.default_rng(2), 20_000, 2, 1.0)
    # mirror symmetry about x = 0
    assert abs(np.mean([p.x[0] > 0 for p in pts]) - 0.5) < 0.02


def test_ball_point_distance_and_center():
    rng = np.random.default_rng(3)
    center = Point.of(1.5, -2.0, 0.25)
    for _ in range(200):
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        r = float(rng.uniform(0, 5))
        assert distance(center, ball_point(u, r, center)) == pytest.approx(r, abs=1e-9)


def test_tiny_radius_stays_at_center():
    for p in sample_ball(np.random.default_rng(4), 50, 2, 1e-9):
        assert p.x[0] == pytest.approx(0, abs=1e-8) and p.z == pytest.approx(1, abs=1e-8)


def test_sampling_is_deterministic():
    a = sample_ball(np.random.default_rng(5), 100, 3, 3.0)
    b = sample_ball(np.random.default_rng(5), 100, 3, 3.0)
    assert a == b


def test_box_samples_in_range():
    pts = sample_box(np.random.default_rng(6), 1000, 3, 2.0, 3.0)
    assert all(0 <= v <= 2 for p in pts for v in p.x)
    assert all(1 <= p.z <= 8 for p in pts)
    with pytest.raises(ValueError):
        sample_box(np.random.default_rng(6), 10, 3, 0.0, 1.0)


def test_bad_sampling_arguments():
    with pytest.raises(ValueError):
        sample_ball(np.random.default_rng(0), 10, 1, 1.0)
    with pytest.raises(ValueError):
        sample_ball(np.random.default_rng(0), -1, 2, 1.0)
    with pytest.raises(ValueError):
        radius_cdf(0.0, 2)


@given(st.lists(st.tuples(st.floats(-1e300, 1e300), st.floats(1e-300, 1e300)), max_size=30))
def test_point_file_round_trip(rows):
    pts = [Point.of(x, z) for x, z in rows]
    d, back = parse_points(format_points(pts, 2))
    assert d == 2 and back == pts


def test_write_and_read_file(tmp_path):
    pts = [Point.of(0.1, 0.2, 0.3), Point.of(-1, 2, 3)]
    path = tmp_path / "pts.txt"
    with open(path, "w") as fh:
        write_points(fh, pts, 3)
    assert read_points(str(path)) == (3, pts)


def test_comments_and_blank_lines():
    assert parse_points("# made by hand\n# dim=2\n\n0 1\n# note\n2 3\n") == (2, [Point.of(0, 1), Point.of(2, 3)])


@pytest.mark.parametrize(
    "text",
    ["0 1\n", "# dim=2\n0 1 2\n", "# dim=2\n0 x\n", "# dim=2\n0 -1\n", "# dim=1\n1\n", "", "# dim=2\n0 nan\n"],
)
def test_parse_errors(text):
    with pytest.raises(PointFileError):
        parse_points(text)


def test_missing_file():
    with pytest.raises(PointFileError):
        read_points("/nonexistent/points.txt")


def test_format_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        format_points([Point.of(0, 0, 1)], 2)
    assert io.StringIO().write(format_points([], 2)) == len("# dim=2\n")
