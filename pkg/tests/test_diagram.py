import itertools
import json

import pytest
from hypothesis import given, strategies as st

from khlambda.diagram import (
    EMPTY, UNKNOT, BandError, BudgetExceeded, DiagramError, add_kink, all_circle_counts, apply_saddle,
    circles_at, connected_sum, disjoint_union, load_table, mirror, parse_pd, read_csv_table, resolve,
    table_lookup,
)

TREFOIL = table_lookup("3_1")
HOPF = "PD[X[1,4,2,3], X[3,2,4,1]]"


def counts_by_weight(d):
    out = {}
    for v, p in sorted(all_circle_counts(d).items()):
        out.setdefault(sum(v), []).append(p)
    return [sorted(ps) for _, ps in sorted(out.items())]


def test_hopf_link_parses():
    d = parse_pd(HOPF)
    assert d.n_crossings == 2
    assert d.components == 2


def test_unknot_text():
    d = parse_pd("PD[Loop[1]]")
    assert d.n_crossings == 0 and d.components == 1
    assert resolve(d, ()).p == 1


@pytest.mark.parametrize("bad", ["PD[X[1,2,3,3]]", "PD[X[1,2]]", "PD[X[1,2,3,4], X[4,3,2,5]]", ""])
def test_malformed_pd_is_rejected(bad):
    with pytest.raises(DiagramError):
        parse_pd(bad)


def test_knotinfo_list_form():
    assert parse_pd("[[1,5,2,4],[3,1,4,6],[5,3,6,2]]") == TREFOIL


def test_trefoil_resolutions():
    assert TREFOIL.n_plus == 3 and TREFOIL.n_minus == 0
    assert resolve(TREFOIL, (0, 0, 0)).p == 2
    assert resolve(TREFOIL, (1, 1, 1)).p == 3
    assert counts_by_weight(TREFOIL) == [[2], [1, 1, 1], [2, 2, 2], [3]]
    assert sum(2**p for p in all_circle_counts(TREFOIL).values()) == 30


def test_kinked_unknot_counts():
    for sign in (1, -1):
        d, _ = add_kink(UNKNOT, 1, sign)
        assert d.n_crossings == 1
        assert sorted(all_circle_counts(d).values()) == [1, 2]
    neg, _ = add_kink(UNKNOT, 1, -1)
    assert neg.n_minus == 1
    # X[r,p,p,r]: the 1-smoothing pinches off the lobe
    assert all_circle_counts(neg) == {(0,): 1, (1,): 2}


def test_empty_diagram_has_one_empty_vertex():
    assert all_circle_counts(EMPTY) == {(): 0}


def test_circle_count_budget():
    with pytest.raises(BudgetExceeded):
        all_circle_counts(table_lookup("10_124"), budget=1000)


def test_saddle_split_and_merge():
    two = apply_saddle(UNKNOT, 1, 1)
    assert two.components == 2 and two.n_crossings == 0
    one = apply_saddle(parse_pd("PD[Loop[1], Loop[2]]"), 1, 2)
    assert one.components == 1


def test_saddle_onto_kinked_unlink_leaves_one_crossing():
    d = apply_saddle(parse_pd("PD[X[3,3,4,4], Loop[2]]"), 4, 2)
    assert d.n_crossings == 1 and d.components == 1


def test_nonplanar_band_is_rejected():
    with pytest.raises(BandError):
        apply_saddle(TREFOIL, 1, 4)


def test_mirror_examples():
    left = mirror(TREFOIL)
    assert (left.n_plus, left.n_minus) == (0, 3)
    assert mirror(UNKNOT) == UNKNOT
    fig8 = mirror(table_lookup("4_1"))
    assert (fig8.n_plus, fig8.n_minus) == (2, 2)


@pytest.mark.parametrize("name", ["3_1", "4_1", "5_2", "6_2", "7_4"])
def test_mirror_involution_and_complement(name):
    d = table_lookup(name)
    m = mirror(d)
    assert mirror(m) == d
    n = d.n_crossings
    counts, mcounts = all_circle_counts(d), all_circle_counts(m)
    for v in itertools.product((0, 1), repeat=n):
        assert mcounts[tuple(1 - x for x in v)] == counts[v]


def test_edges_change_circle_count_by_one(knot_table):
    for rec in knot_table:
        d = rec.diagram
        if d.n_crossings > 7:
            continue
        n = d.n_crossings
        for bits in range(1 << n):
            p = len(circles_at(d, bits))
            for i in range(n):
                if (bits >> i) & 1:
                    assert abs(p - len(circles_at(d, bits ^ (1 << i)))) == 1


@given(st.permutations(range(1, 7)))
def test_resolution_ignores_arc_names(perm):
    relabel = dict(zip(range(1, 7), perm))
    d2 = parse_pd(str([[relabel[a] for a in x] for x in TREFOIL.crossings]))
    assert all_circle_counts(d2) == all_circle_counts(TREFOIL)
    assert d2.signs == TREFOIL.signs


def test_circles_are_labelled_by_smallest_arc():
    circs = resolve(TREFOIL, (1, 0, 1)).circles
    mins = [min(c) for c in circs]
    assert mins == sorted(mins)
    assert sorted(a for c in circs for a in c) == list(range(1, 7))


def test_split_and_connected_sums():
    u = disjoint_union(TREFOIL, table_lookup("4_1"))
    assert u.components == 2 and u.n_crossings == 7
    s = connected_sum(TREFOIL, TREFOIL)
    assert s.components == 1 and s.n_plus == 6


def test_table_ingestion(tmp_path, knot_table):
    assert len(knot_table) >= 20
    assert all(r.diagram.n_crossings <= 10 for r in knot_table)
    p = tmp_path / "t.csv"
    p.write_text("name,pd,expected_s\nunknot,PD[Loop[1]],0\nhopf,\"" + HOPF + "\",\n")
    recs = load_table(p)
    assert [r.name for r in recs] == ["unknot", "hopf"]
    assert recs[0].expected_s == 0 and recs[1].expected_s is None
    j = tmp_path / "t.json"
    j.write_text(json.dumps([{"name": "t", "pd": TREFOIL.to_pd(), "expected_s": 2}]))
    assert load_table(j)[0].diagram == TREFOIL
    with pytest.raises(DiagramError):
        read_csv_table("a,b\n1,2\n")
