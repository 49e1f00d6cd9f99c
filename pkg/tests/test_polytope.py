from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscreduce import polytope
from oscreduce.polytope import TorusAction


def F(*xs):
    return tuple(Fraction(x) for x in xs)


def test_cp3_vertices_and_hull():
    poly = polytope.fixed_point_values(polytope.cp3_example())
    assert set(poly.vertices) == {F(0, 0), F(1, 1), F(3, 0), F(0, 3)}
    assert set(poly.hull_vertices) == {F(0, 0), F(3, 0), F(0, 3)}
    assert poly.contains(F(1, 1)) and not poly.contains(F(2, 2))


@pytest.mark.parametrize("k,count", [(1, 10), (2, 28), (4, 91)])
def test_cp3_lattice_points_match_oracle(k, count):
    action = polytope.cp3_example()
    poly = polytope.fixed_point_values(action)
    pts = polytope.bs_lattice_points(poly, k)
    assert len(pts) == count
    assert pts == polytope.brute_force_lattice_points(action.W, k)
    for base in range(len(poly.vertices)):
        assert polytope.bs_lattice_points(poly, k, base=base) == pts


def test_k1_includes_all_vertices():
    poly = polytope.fixed_point_values(polytope.cp3_example())
    assert set(poly.vertices) <= set(polytope.bs_lattice_points(poly, 1))


def test_cp1():
    poly = polytope.fixed_point_values(polytope.cp1_example())
    assert polytope.bs_lattice_points(poly, 2) == [F(0), F("1/2"), F(1)]


def test_three_dimensional_hull():
    action = TorusAction(((0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0)))
    poly = polytope.fixed_point_values(action)
    assert len(poly.hull_vertices) == 4
    for k in (1, 2):
        assert polytope.bs_lattice_points(poly, k) == polytope.brute_force_lattice_points(action.W, k)


def test_invalid_actions():
    with pytest.raises(ValueError):
        TorusAction(((1, 1), (2, 2)))
    with pytest.raises(ValueError):
        # full rank, but the fixed point values only span a segment
        polytope.fixed_point_values(TorusAction(((1, 0), (0, 1))))
    assert TorusAction.parse("0,0;1,1;3,0;0,3") == polytope.cp3_example()


def test_ehrhart_exponent():
    poly = polytope.fixed_point_values(polytope.cp3_example())
    assert abs(polytope.ehrhart_exponent(poly, [4, 8, 16, 32, 64]) - 2) <= 0.1


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=3, max_size=6, unique=True),
       st.integers(1, 3))
def test_random_polygons(rows, k):
    try:
        action = TorusAction(tuple(rows))
        poly = polytope.fixed_point_values(action)
    except ValueError:
        return
    pts = polytope.bs_lattice_points(poly, k)
    assert all(poly.contains(x) for x in pts)
    assert pts == polytope.brute_force_lattice_points(action.W, k)
    for base in range(len(poly.vertices)):
        assert polytope.bs_lattice_points(poly, k, base=base) == pts
