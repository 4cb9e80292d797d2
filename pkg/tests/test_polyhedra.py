from fractions import Fraction as F

import pytest

from setrisk import NEG_INF, ExtRat, Polyhedron, positive_dual_cone
from setrisk.polyhedra import project_halfspaces

ZERO2 = (F(0), F(0))


def test_from_halfspaces_ray():
    p = Polyhedron.from_halfspaces([((1,), 0)], 1)
    assert p.vertices == ((F(0),),)
    assert p.rays == ((1,),)


def test_from_generators_orthant():
    for n in (1, 2, 3):
        orth = Polyhedron.nonnegative_orthant(n)
        unit = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        assert orth.rays == tuple(sorted(unit))
        assert len(orth.halfspaces) == n


def test_redundant_constraint_removed():
    p = Polyhedron.from_halfspaces([((1,), -1), ((1,), 0)], 1)
    assert p.halfspaces == (((1,), 0),)


def test_duplicate_generators_removed():
    p = Polyhedron.from_generators([(0,), (1,), (1,), (F(1, 2),)], dim=1)
    assert p.vertices == ((F(0),), (F(1),))


def test_convert_unit_square():
    sq = Polyhedron.from_halfspaces(
        [((1, 0), 0), ((0, 1), 0), ((-1, 0), -1), ((0, -1), -1)], 2
    )
    assert len(sq.vertices) == 4
    assert sq.rays == ()


def test_convert_halfspace_lineality():
    # hand enumeration: {x + y >= 0} = point 0 + line span(1,-1) + ray (1,1)
    hs = Polyhedron.from_halfspaces([((1, 1), 0)], 2)
    assert hs.vertices == (ZERO2,)
    assert set(hs.rays) == {(1, -1), (-1, 1), (1, 1)}
    assert hs.halfspaces == (((1, 1), 0),)


def test_convert_idempotent():
    sq = Polyhedron.from_halfspaces([((1, 0), 0), ((0, 1), 0), ((-1, -1), -2)], 2)
    assert sq.convert() is sq
    rebuilt = Polyhedron.from_generators(sq.vertices, sq.rays, dim=2)
    assert rebuilt == sq


def test_minkowski_segments():
    seg = Polyhedron.from_generators([(0,), (1,)], dim=1)
    two = seg.minkowski_sum(seg)
    assert two.vertices == ((F(0),), (F(2),))


def test_minkowski_identity_element():
    p = Polyhedron.from_halfspaces([((1, 2), -1), ((-1, 0), -3), ((0, -1), -2)], 2)
    zero = Polyhedron.from_generators([ZERO2], dim=2)
    assert p.minkowski_sum(zero).set_equal(p)


def test_intersection_idempotent():
    p = Polyhedron.from_halfspaces([((1, 0), 0), ((-1, -1), -4)], 2)
    assert p.intersect(p).set_equal(p)


def test_orthant_in_halfspace():
    orth = Polyhedron.nonnegative_orthant(3)
    hs = Polyhedron.from_halfspaces([((1, 1, 1), 0)], 3)
    assert hs.contains_set(orth)
    assert not orth.contains_set(hs)


def test_project_square_to_axis():
    sq = Polyhedron.from_halfspaces(
        [((1, 0), 0), ((0, 1), 0), ((-1, 0), -1), ((0, -1), -1)], 2
    )
    seg = sq.project([0])
    assert seg.vertices == ((F(0),), (F(1),))


def test_project_fourier_motzkin_fixture():
    # {(x, z): z >= 0, x + z >= 1, z <= 1} projected onto x is [0, inf)
    p = Polyhedron.from_halfspaces([((0, 1), 0), ((1, 1), 1), ((0, -1), -1)], 2)
    q = p.project([0])
    assert q.vertices == ((F(0),),)
    assert q.rays == ((1,),)


def test_project_product_with_zero():
    p = Polyhedron.from_halfspaces([((1, 1), 0), ((-1, 2), -2)], 2)
    zero = Polyhedron.from_generators([(0,)], dim=1)
    prod = p.product(zero)
    assert prod.project([0, 1]).set_equal(p)


def test_support_values_orthant():
    orth = Polyhedron.nonnegative_orthant(3)
    assert orth.support_value((1, 1, 1)) == ExtRat.finite(0)
    assert orth.support_value((1, -1, 1)) == NEG_INF


def test_support_value_empty_rejected():
    empty = Polyhedron.empty(2)
    with pytest.raises(ValueError):
        empty.support_value((1, 0))


def test_support_value_matches_vertex_minimum():
    verts = [(0, 0), (2, 1), (1, 3), (-1, 2)]
    p = Polyhedron.from_generators(verts, dim=2)
    for a in [(1, 0), (3, -2), (-1, -1), (0, 5)]:
        expected = min(a[0] * v[0] + a[1] * v[1] for v in verts)
        assert p.support_value(a) == ExtRat.finite(expected)


def test_recession_cone():
    p = Polyhedron.from_halfspaces([((1, 0), -1), ((0, 1), -2), ((1, 1), 0)], 2)
    rec = p.recession_cone()
    assert rec.is_cone()
    assert rec.contains_point((1, 0)) and rec.contains_point((0, 1))
    assert not rec.contains_point((-1, 0))


def test_dual_of_orthant_is_orthant():
    orth = Polyhedron.nonnegative_orthant(3)
    assert positive_dual_cone(orth).set_equal(orth)


def test_dual_of_origin_is_everything():
    zero = Polyhedron.from_generators([ZERO2], dim=2)
    assert positive_dual_cone(zero).set_equal(Polyhedron.full_space(2))


def test_dual_of_2d_cone_hand_computed():
    c = Polyhedron.from_generators([ZERO2], [(2, 1), (1, 2)], dim=2)
    dc = positive_dual_cone(c)
    assert set(dc.rays) == {(2, -1), (-1, 2)}


def test_dual_requires_cone():
    seg = Polyhedron.from_generators([(0,), (1,)], dim=1)
    with pytest.raises(ValueError):
        positive_dual_cone(seg)


def test_empty_certificates():
    e = Polyhedron.from_halfspaces([((1,), 1), ((-1,), 0)], 1)
    assert e.is_empty
    assert e.halfspaces == (((0,), 1),)
    assert e.vertices == () and e.rays == ()
    assert not e.contains_point((0,))
    assert Polyhedron.full_space(1).contains_set(e)


def test_dimension_mismatch_rejected():
    p1 = Polyhedron.full_space(1)
    p2 = Polyhedron.full_space(2)
    with pytest.raises(ValueError):
        p1.minkowski_sum(p2)
    with pytest.raises(ValueError):
        p1.intersect(p2)
    with pytest.raises(ValueError):
        p1.contains_set(p2)


def test_translate_and_scale():
    sq = Polyhedron.from_halfspaces(
        [((1, 0), 0), ((0, 1), 0), ((-1, 0), -1), ((0, -1), -1)], 2
    )
    moved = sq.translate((F(1, 2), -1))
    assert moved.contains_point((F(3, 2), 0)) and not moved.contains_point((0, 0))
    doubled = sq.scale(2)
    assert doubled.contains_point((2, 2)) and not doubled.contains_point((2, F(5, 2)))
    assert moved.translate((-F(1, 2), 1)) == sq


def test_separating_direction():
    sq = Polyhedron.from_halfspaces([((1, 0), 0), ((0, 1), 0)], 2)
    hit = sq.separating_direction((-1, 5))
    assert hit == ((1, 0), 0)
    assert sq.separating_direction((2, 3)) is None


def test_project_halfspaces_skips_intermediate_blowup():
    # z >= 0, x + z >= 1, z <= 1 again, through the raw pipeline
    q = project_halfspaces([((0, 1), 0), ((1, 1), 1), ((0, -1), -1)], 2, [0])
    assert q.vertices == ((F(0),),) and q.rays == ((1,),)


def test_linear_image_and_preimage():
    sq = Polyhedron.from_halfspaces(
        [((1, 0), 0), ((0, 1), 0), ((-1, 0), -1), ((0, -1), -1)], 2
    )
    diag = sq.linear_image([(1, 1)])
    assert diag.vertices == ((F(0),), (F(2),))
    pre = sq.linear_preimage([(1,), (1,)])  # {t : (t, t) in square}
    assert pre.vertices == ((F(0),), (F(1),))
    shifted = sq.linear_preimage([(1,), (1,)], shift=(F(1, 2), 0))
    assert shifted.vertices == ((F(0),), (F(1, 2),))
