import pytest

from khlambda.cube import build_cube
from khlambda.diagram import UNKNOT, connected_sum, parse_pd, table_lookup
from khlambda.homology import InvariantViolation, homology
from khlambda.movies import builtin_movies, with_torus_tube
from khlambda.sinvariant import (
    grading_pair, mirror_check, positive_diagram_s, route_b_summary, s_from_grading, s_from_movie, s_invariant,
    seifert_circle_count, slice_genus_bound,
)

MOVIES = builtin_movies()


@pytest.mark.parametrize("name,s", [("unknot", 0), ("trefoil", 2), ("left-trefoil", -2), ("figure-eight", 0)])
def test_route_a_examples(name, s):
    assert s_invariant(table_lookup(name)).s == s


def test_route_a_degrees():
    assert grading_pair(homology(build_cube(UNKNOT))) == (1, -1)
    # z+ has gr = 1; for s = 2 it is the lower of the two generators
    assert grading_pair(homology(build_cube(table_lookup("3_1")))) == (-3, -1)


def test_route_a_rejects_links():
    r = homology(build_cube(UNKNOT))
    r2 = homology(build_cube(parse_pd("PD[Loop[1], Loop[2]]")))
    assert s_from_grading(r) == 0
    with pytest.raises(InvariantViolation):
        s_from_grading(r2)


@pytest.mark.parametrize("name,s", [("unknot_identity", 0), ("torus_tube", 0), ("trefoil_seifert", 2)])
def test_route_b_examples(name, s):
    assert s_from_movie(MOVIES[name]) == s


@pytest.mark.parametrize("name", sorted(MOVIES))
def test_routes_agree(name):
    m = MOVIES[name]
    assert s_from_movie(m) == s_invariant(m.end).s
    assert s_from_movie(with_torus_tube(m)) == s_invariant(m.end).s
    assert route_b_summary(m)["routes_agree"]


@pytest.mark.parametrize("name,pair", [("trefoil", (2, -2)), ("unknot", (0, 0)), ("figure-eight", (0, 0))])
def test_mirror_check_examples(name, pair):
    rep = mirror_check(table_lookup(name))
    assert (rep["s"], rep["s_mirror"]) == pair


@pytest.mark.parametrize("s,bound", [(2, 1), (0, 0), (6, 3), (-4, 2)])
def test_slice_genus_bound(s, bound):
    assert slice_genus_bound(s) == bound


def test_slice_genus_bound_rejects_odd():
    with pytest.raises(ValueError):
        slice_genus_bound(3)


def test_table_values_up_to_eight_crossings(knot_table):
    for rec in knot_table:
        if rec.diagram.n_crossings > 8:
            continue
        assert s_invariant(rec.diagram).s == rec.expected_s, rec.name


def test_positive_diagrams_are_sharp(knot_table):
    for rec in knot_table:
        d = rec.diagram
        if d.n_minus or d.n_crossings > 8:
            continue
        assert s_invariant(d).s == positive_diagram_s(d), rec.name


def test_seifert_circles_of_trefoil():
    assert seifert_circle_count(table_lookup("3_1")) == 2
    with pytest.raises(ValueError):
        positive_diagram_s(table_lookup("4_1"))


@pytest.mark.parametrize("a,b", [("3_1", "3_1"), ("3_1", "left-trefoil"), ("3_1", "4_1"), ("5_2", "left-trefoil")])
def test_connected_sum_additivity(a, b):
    da, db = table_lookup(a), table_lookup(b)
    s = s_invariant(connected_sum(da, db)).s
    assert s == s_invariant(da).s + s_invariant(db).s


def test_report_json():
    rep = s_invariant(table_lookup("3_1"), name="3_1").to_json()
    assert rep["s"] == 2 and rep["slice_genus_bound"] == 1
    assert rep["route_a"] == {"q_z_plus": -3, "q_z_minus": -1}
    assert "mirror" in rep["convention"]
