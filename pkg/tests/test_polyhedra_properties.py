"""Randomized invariants of the polyhedral kernel against brute-force oracles."""

import random
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from setrisk import NEG_INF, Polyhedron, positive_dual_cone

from _oracles import (
    dot,
    grid,
    hull_2d,
    point_in_polytope_plus_ray,
    random_hrep,
    random_polytope_vertices,
    satisfies,
)

GRID_2D = grid((-2, -1, -F(1, 2), 0, F(1, 2), 1, 2), 2)
GRID_3D = grid((-1, 0, 1), 3)


def test_round_trip_membership_on_grid():
    rng = random.Random(7001)
    for _ in range(60):
        dim = rng.choice((2, 3))
        rows, anchor = random_hrep(rng, dim)
        p = Polyhedron.from_halfspaces(rows, dim)
        assert p.contains_point(anchor)
        points = GRID_2D if dim == 2 else GRID_3D
        for x in points:
            assert satisfies(rows, x) == p.contains_point(x)


def test_round_trip_canonical_form_stable():
    rng = random.Random(7002)
    for _ in range(40):
        rows, _ = random_hrep(rng, 2)
        p = Polyhedron.from_halfspaces(rows, 2)
        q = Polyhedron.from_generators(p.vertices, p.rays, dim=2)
        assert p == q  # identical canonical reps, not just set equality
        assert p.convert().set_equal(p)


def test_minkowski_sum_matches_monotone_chain_hull():
    rng = random.Random(7003)
    for _ in range(60):
        vp = random_polytope_vertices(rng, 2, count=rng.randint(1, 5))
        vq = random_polytope_vertices(rng, 2, count=rng.randint(1, 5))
        p = Polyhedron.from_generators(vp, dim=2)
        q = Polyhedron.from_generators(vq, dim=2)
        s = p.minkowski_sum(q)
        pairwise = [(a[0] + b[0], a[1] + b[1]) for a in vp for b in vq]
        assert tuple(sorted(s.vertices)) == hull_2d(pairwise)


def test_triangle_plus_ray_grid_oracle():
    triangle_rows = [((1, 0), 0), ((0, 1), 0), ((-1, -1), -2)]
    tri = Polyhedron.from_halfspaces(triangle_rows, 2)
    ray = (1, 1)
    swept = tri.minkowski_sum(Polyhedron.from_generators([(0, 0)], [ray], dim=2))
    for x in GRID_2D:
        assert swept.contains_point(x) == point_in_polytope_plus_ray(
            x, triangle_rows, ray
        )


def test_intersection_grid_oracle():
    rng = random.Random(7004)
    for _ in range(40):
        rows1, _ = random_hrep(rng, 2)
        rows2, _ = random_hrep(rng, 2)
        p = Polyhedron.from_halfspaces(rows1, 2)
        q = Polyhedron.from_halfspaces(rows2, 2)
        inter = p.intersect(q)
        for x in GRID_2D:
            assert inter.contains_point(x) == (
                satisfies(rows1, x) and satisfies(rows2, x)
            )


def test_dual_cone_definition_on_grid():
    rng = random.Random(7005)
    for _ in range(40):
        gens = [
            tuple(rng.randint(-2, 2) for _ in range(2)) for _ in range(rng.randint(1, 4))
        ]
        gens = [g for g in gens if any(g)] or [(1, 0)]
        c = Polyhedron.from_generators([(0, 0)], gens, dim=2)
        dual = positive_dual_cone(c)
        for v in GRID_2D:
            direct = all(dot(g, v) >= 0 for g in c.rays)
            assert dual.contains_point(v) == direct


def test_double_dual_recovers_cone():
    rng = random.Random(7006)
    for _ in range(30):
        gens = [tuple(rng.randint(-2, 2) for _ in range(3)) for _ in range(3)]
        gens = [g for g in gens if any(g)] or [(1, 0, 0)]
        c = Polyhedron.from_generators([(0, 0, 0)], gens, dim=3)
        assert positive_dual_cone(positive_dual_cone(c)).set_equal(c)


def test_sum_support_additivity():
    rng = random.Random(7007)
    for _ in range(30):
        rows1, _ = random_hrep(rng, 2)
        rows2, _ = random_hrep(rng, 2)
        p = Polyhedron.from_halfspaces(rows1, 2)
        q = Polyhedron.from_halfspaces(rows2, 2)
        s = p.minkowski_sum(q)
        for a in [(1, 0), (0, 1), (1, 1), (-1, 2), (-3, -1)]:
            sp, sq = p.support_value(a), q.support_value(a)
            if sp.is_neg_inf or sq.is_neg_inf:
                assert s.support_value(a) == NEG_INF
            else:
                assert s.support_value(a).value == sp.value + sq.value


def test_sum_monotone_in_each_argument():
    rng = random.Random(7008)
    for _ in range(25):
        rows, _ = random_hrep(rng, 2)
        p = Polyhedron.from_halfspaces(rows, 2)
        p_big = Polyhedron.from_halfspaces(rows[:-1], 2)
        vq = random_polytope_vertices(rng, 2)
        q = Polyhedron.from_generators(vq, dim=2)
        assert p_big.contains_set(p)
        assert p_big.minkowski_sum(q).contains_set(p.minkowski_sum(q))


def test_projection_commutes_with_sum_on_independent_coords():
    rng = random.Random(7009)
    for _ in range(25):
        # P lives on coordinate 0, Q on coordinate 1: projections decouple
        p1 = Polyhedron.from_generators(
            [(v[0], 0) for v in random_polytope_vertices(rng, 1, count=3)], dim=2
        )
        q1 = Polyhedron.from_generators(
            [(0, v[0]) for v in random_polytope_vertices(rng, 1, count=3)], dim=2
        )
        s = p1.minkowski_sum(q1)
        assert s.project([0]).set_equal(p1.project([0]))
        assert s.project([1]).set_equal(q1.project([1]))


@st.composite
def small_hrep(draw):
    dim = draw(st.integers(2, 3))
    n_rows = draw(st.integers(1, 4))
    rows = []
    for _ in range(n_rows):
        a = tuple(draw(st.integers(-3, 3)) for _ in range(dim))
        b = draw(st.integers(-3, 1))
        rows.append((a, b))
    return rows, dim


@given(small_hrep())
@settings(max_examples=120, deadline=None)
def test_hypothesis_round_trip(data):
    rows, dim = data
    p = Polyhedron.from_halfspaces(rows, dim)
    if p.is_empty:
        assert p.vertices == ()
        return
    q = Polyhedron.from_generators(p.vertices, p.rays, dim=dim)
    assert q == p
    for v in p.vertices:
        assert p.contains_point(v)
    rec = p.recession_cone()
    for r in p.rays:
        assert rec.contains_point(r)
