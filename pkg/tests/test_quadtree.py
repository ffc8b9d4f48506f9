import math
import random

import numpy as np
import pytest

from hyperquad.fixedpoint import transform
from hyperquad.geometry import Horobox, Point, distance, horobox_contains, horobox_diameter
from hyperquad.quadtree import (
    TABLE1,
    build,
    build_aligned,
    cell_geometry,
    cell_horobox,
    child_count,
    child_diameter_ratio,
    diameter_at,
    dfs_order,
    fatness,
    fatness_at,
    infinite_cell,
    root_cell,
    subdivide,
)
from hyperquad.validation import fatness_sweep


def random_points(rng, n, d, spread=3.0):
    return [
        Point(tuple(rng.uniform(-spread, spread) for _ in range(d - 1)), 2 ** rng.uniform(-3, 3))
        for _ in range(n)
    ]


def same_box(a: Horobox, b: Horobox, rel=1e-12):
    return (
        all(math.isclose(u, v, rel_tol=rel, abs_tol=1e-300) for u, v in zip(a.x, b.x))
        and math.isclose(a.z, b.z, rel_tol=rel)
        and math.isclose(a.w, b.w, rel_tol=rel)
        and math.isclose(a.h, b.h, rel_tol=rel)
    )


# -- root cell ----------------------------------------------------------------


def test_root_at_level_zero_boundary():
    for d in (2, 3, 4):
        w = 1 / math.sqrt(d - 1)
        pts = [Point((0.0,) * (d - 1), 1.0), Point((w,) * (d - 1), 2.0)]
        box, level = root_cell(pts)
        assert level == 0
        assert box.w == pytest.approx(w) and box.h == 1.0


def test_root_level_two_example():
    pts = [Point.of(0, 1), Point.of(3, 1), Point.of(0, 2 ** 1.5)]
    box, level = root_cell(pts)
    assert level == 2
    assert (box.x, box.z, box.w, box.h) == ((0.0,), 1.0, 8.0, 4.0)


def test_root_contains_points():
    rng = random.Random(1)
    for _ in range(100):
        d = rng.randint(2, 4)
        pts = random_points(rng, rng.randint(1, 30), d)
        box, _ = root_cell(pts)
        assert all(horobox_contains(box, p, closed=True) for p in pts)


def test_small_sets_get_negative_levels():
    pts = [Point.of(0, 1), Point.of(0.01, 1.01)]
    _, level = root_cell(pts)
    assert level < 0


# -- subdivision --------------------------------------------------------------


def test_child_counts_from_subdivision():
    assert len(subdivide(Horobox((0.0,), 1.0, 2.0, 2.0))) == 3
    assert len(subdivide(Horobox((0.0,), 1.0, 8.0, 4.0))) == 5
    assert len(subdivide(Horobox((0.0, 0.0), 1.0, 0.5, 0.5))) == 8
    assert child_count(1, 2) == 3
    assert child_count(2, 2) == 5
    assert child_count(3, 2) == 17
    assert child_count(0, 3) == 8
    assert child_count(-4, 3) == 8


@pytest.mark.parametrize("box", [Horobox((0.0,), 1.0, 8.0, 4.0), Horobox((1.0, -2.0), 0.5, 2 / math.sqrt(2), 2.0),
                                 Horobox((0.0, 0.0), 1.0, 0.25, 0.5)])
def test_children_tile_the_parent(box):
    kids = subdivide(box)
    rng = random.Random(2)
    d = box.dim
    for _ in range(2000):
        x = tuple(v + rng.random() * box.euclidean_width for v in box.x)
        z = box.z * 2 ** (rng.random() * box.h)
        p = Point(x, z)
        if not horobox_contains(box, p):
            continue
        assert sum(horobox_contains(c, p) for c in kids) == 1
    # volumes: the children partition the box
    def volume(b):
        # hyperbolic volume of [0, ew]^(d-1) x [z, z 2^h] is ew^(d-1) (z^(1-d) - top^(1-d)) / (d - 1)
        return b.euclidean_width ** (d - 1) * (b.z ** (1 - d) - b.top ** (1 - d)) / (d - 1)
    assert sum(volume(c) for c in kids) == pytest.approx(volume(box), rel=1e-12)


def test_top_child_first():
    kids = subdivide(Horobox((0.0,), 1.0, 8.0, 4.0))
    assert kids[0].z == 4.0
    assert all(k.z == 1.0 for k in kids[1:])


# -- finite tree --------------------------------------------------------------


def test_single_point_tree():
    p = Point.of(0.5, 2)
    tree = build([p])
    assert tree.root.is_leaf and tree.root.points == [p]
    assert dfs_order(tree) == [p]


def test_close_points_are_separated():
    p = Point.of(0.1, 1.2)
    q = Point.of(0.1 + 0.3 * 1.2, 1.2)
    assert distance(p, q) == pytest.approx(0.3, abs=0.01)
    tree = build([p, q])
    leaves = [n for n in tree.leaves() if n.points]
    assert len(leaves) == 2
    # each leaf cell is smaller than the pair distance at its level scale
    for leaf in leaves:
        assert leaf.level <= 0
        assert horobox_diameter(leaf.cell) < 2 * distance(p, q) * 4


def test_structure_of_random_trees():
    rng = random.Random(3)
    for _ in range(100):
        d = rng.randint(2, 3)
        pts = random_points(rng, 50, d)
        tree = build(pts)
        seen = []
        for node in tree.nodes():
            if node.is_leaf:
                assert len(node.points) <= 1
                seen.extend(node.points)
                for p in node.points:
                    assert horobox_contains(node.cell, p, closed=True)
            else:
                assert node.size >= 2
        assert sorted(p.coords for p in seen) == sorted(p.coords for p in pts)


def test_duplicates_rejected():
    with pytest.raises(ValueError):
        build([Point.of(0, 1), Point.of(0, 1)])


def test_upper_tile_point_first():
    lower, upper = Point.of(0.25, 1.5), Point.of(0.25, 3.0)
    assert dfs_order(build_aligned([lower, upper])) == [upper, lower]


def test_top_child_visited_first_in_finite_tree():
    # root of height 2 (level 1): the top child holds z in [2, 4)
    lower, upper = Point.of(0.25, 1.0), Point.of(0.25, 3.9)
    assert root_cell([lower, upper])[1] == 1
    assert dfs_order(build([lower, upper])) == [upper, lower]


def test_below_level_zero_lower_half_first():
    lower, upper = Point.of(0.25, 1.5), Point.of(0.25, 2.9)
    assert root_cell([lower, upper])[1] == 0
    assert dfs_order(build([lower, upper])) == [lower, upper]


# -- infinite quadtree --------------------------------------------------------


def test_origin_tile():
    addr, box = infinite_cell(Point.of(0, 0, 1), 0)
    assert addr.a == (0, 0) and addr.b == 0
    assert box.z == 1.0 and box.h == 1.0


def test_level_one_cell_height_range():
    addr, box = infinite_cell(Point.of(0, 3), 1)
    assert addr.b == math.floor(math.log2(3) / 2) == 0
    assert (box.z, box.top) == (1.0, 4.0)


def test_cells_nest():
    rng = random.Random(4)
    for _ in range(300):
        d = rng.choice((2, 3))
        top = 4 if d == 2 else 3
        level = rng.randint(-4, top - 1)
        p = random_points(rng, 1, d, spread=20)[0]
        _, box = infinite_cell(p, level)
        _, parent = infinite_cell(p, level + 1)
        assert horobox_contains(box, p, closed=True)
        assert any(same_box(box, c) for c in subdivide(parent))


def test_alpha_stays_in_range_on_deep_descents():
    rng = random.Random(5)
    for _ in range(10_000):
        p = random_points(rng, 1, rng.choice((2, 3, 4)))[0]
        addr, _ = infinite_cell(p, -20)
        g = cell_geometry(addr, p.dim)
        assert 0.5 < g.alpha <= 1.0


def test_geometry_matches_cell_boxes():
    rng = random.Random(6)
    for _ in range(500):
        d = rng.choice((2, 3, 5))
        level = rng.randint(-12, 5)
        p = random_points(rng, 1, d)[0]
        addr, box = infinite_cell(p, level)
        g = cell_geometry(addr, d)
        assert g.diameter == pytest.approx(horobox_diameter(box), rel=1e-10)
        assert g.height == box.h
        assert g.width == pytest.approx(box.w, rel=1e-12)


# -- diameters and ratios -----------------------------------------------------


def test_level_zero_diameter_equals_unit_tile():
    # a level-0 cell is R(x, z, 1/sqrt(d-1), 1); its diameter is 2 arsinh(1/2)
    for d in (2, 3, 6):
        assert diameter_at(0) == pytest.approx(horobox_diameter(Horobox((0.0,) * (d - 1), 1, 1 / math.sqrt(d - 1), 1)))
    assert diameter_at(0) == pytest.approx(2 * math.asinh(0.5), abs=1e-15)


def test_level_two_diameter():
    assert diameter_at(2) == pytest.approx(2 * math.asinh(4), abs=1e-14)
    assert diameter_at(2) == pytest.approx(4.189425, abs=5e-7)


@pytest.mark.parametrize(
    "level,alpha,alpha_child,expected,tol",
    [(2, 1, 1, 0.4208, 5e-5), (0, 1, 1, 0.5605, 5e-5), (-1, 2 ** -0.5, 8 ** -0.25, 0.485, 5e-4)],
)
def test_ratio_examples(level, alpha, alpha_child, expected, tol):
    assert child_diameter_ratio(level, alpha, alpha_child) == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("row", TABLE1, ids=lambda r: f"l{r[0]}-a{r[1]:.3f}-c{r[2]:.3f}")
def test_ratio_formula_matches_box_diameters(row):
    level, alpha, alpha_child = row[:3]
    d = 2
    if level >= 1:
        parent = Horobox((0.0,), 1.0, 2.0 ** (2 ** level - 1), 2.0 ** level)
        child = subdivide(parent)[1]
    else:
        # at level <= 0 child 2 is the upper half, whose width factor shrinks
        parent = Horobox((0.0,), 1.0, alpha * 2.0 ** level, 2.0 ** level)
        kids = subdivide(parent)
        child = kids[2] if alpha_child != alpha else kids[0]
    oracle = horobox_diameter(child) / horobox_diameter(parent)
    assert child_diameter_ratio(level, alpha, alpha_child) == pytest.approx(oracle, rel=1e-10)


def test_inadmissible_alpha_rejected():
    with pytest.raises(ValueError):
        child_diameter_ratio(-1, 1.0, 0.9)
    with pytest.raises(ValueError):
        child_diameter_ratio(0, 0.8)


# -- fatness ------------------------------------------------------------------


def test_fatness_matches_box():
    for level in range(-6, 5):
        for d in (2, 4):
            box = Horobox((0.0,) * (d - 1), 1.0, 2.0 ** (2 ** level - 1) / math.sqrt(d - 1) if level >= 0
                          else 2.0 ** level / math.sqrt(d - 1), 2.0 ** level)
            assert fatness_at(level, 1.0, d) == pytest.approx(fatness(box), rel=1e-12)


def test_fatness_scaled_is_bounded_below():
    assert fatness_sweep(2000, 1) > 0.1


def test_fatness_decays_like_inverse_sqrt_d():
    values = [fatness_at(-3, 1.0, d) * math.sqrt(d) for d in range(2, 40)]
    assert min(values) > 0.1
    assert fatness_at(-3, 1.0, 400) < fatness_at(-3, 1.0, 4)


def test_aligned_tree_leaves_hold_points():
    rng = np.random.default_rng(7)
    pts = [Point.of(float(a), float(b), float(2 ** c)) for a, b, c in rng.uniform(-4, 4, (40, 3))]
    tree = build_aligned(pts)
    assert sorted(p.coords for p in dfs_order(tree)) == sorted(p.coords for p in pts)
    for leaf in tree.leaves():
        assert len({transform(p) for p in leaf.points}) <= 1
        if leaf.cell is not None:
            for p in leaf.points:
                assert horobox_contains(leaf.cell, p, closed=True)


def test_cell_horobox_level_zero_width():
    addr, box = infinite_cell(Point.of(5.0, 1.5), 0)
    assert cell_horobox(addr, 2) == box
    assert box.w == 1.0
