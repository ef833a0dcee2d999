import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from khlambda.cube import build_cube, specialize_lee
from khlambda.diagram import UNKNOT, mirror, parse_pd, table_lookup
from khlambda.dvr import ONE, ZERO, DvrScalar, lam
from khlambda.homology import (
    ChainComplex, SparseMatrix, exactness_power, homology, pre_reduce, smith_reduce, solve_linear,
    torsion_annihilator_exponent,
)

L = lam(1)
TREFOIL = table_lookup("3_1")


def mat(rows):
    return [[DvrScalar(x) for x in r] for r in rows]


def dense_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), ZERO) for j in range(len(B[0]))] for i in range(len(A))]


def check_smith(M):
    sf = smith_reduce(M)
    D = dense_mul(dense_mul(sf.U, M), sf.V)
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            want = sf.diagonal[i] if i == j and i < sf.rank else ZERO
            assert x == want
    ks = sf.exponents
    assert ks == sorted(ks)
    return ks


def test_smith_examples():
    assert check_smith(mat([[L]])) == [1]
    assert check_smith(mat([[1, L], [L, lam(2)]])) == [0]
    assert check_smith(mat([[2 * lam(2), 0], [0, 3]])) == [0, 2]


@given(st.lists(st.lists(st.sampled_from([0, 1, -1, 2, "l", "l2", "1+l"]), min_size=3, max_size=3), min_size=1, max_size=4))
def test_smith_random(rows):
    conv = {"l": L, "l2": lam(2), "1+l": 1 + L}
    M = [[conv[x] if isinstance(x, str) else DvrScalar(x) for x in r] for r in rows]
    check_smith(M)


def test_linear_solves():
    A = mat([[L, 0], [0, lam(2)]])
    assert solve_linear(A, [lam(2), lam(3)]) == [L, L]
    assert solve_linear(A, [ONE, ZERO]) is None
    assert exactness_power(A, [ONE, L]) == 1
    assert exactness_power(mat([[1], [0]]), [ZERO, ONE]) is None


def test_unknot_homology():
    r = homology(build_cube(UNKNOT))
    assert r.free_rank == 2 and r.torsion == []
    assert sorted((fg.q, fg.gr) for fg in r.free_generators) == [(-1, 3), (1, 1)]
    assert torsion_annihilator_exponent(r) == 0


def test_trefoil_homology():
    r = homology(build_cube(TREFOIL))
    assert r.free_rank == 2
    # free part sits at q = -s +- 1: this complex computes the mirror's Kh
    assert sorted(fg.q for fg in r.free_generators) == [-3, -1]
    assert r.torsion == [2]
    assert torsion_annihilator_exponent(r) == 2
    assert r.betti_table()[0] == {"h": -2, "q": -5, "free": 0, "torsion": [2]}


def test_unlink_rank():
    assert homology(build_cube(parse_pd("PD[Loop[1], Loop[2]]"))).free_rank == 4


def test_torsion_exponent_of_a_list():
    assert torsion_annihilator_exponent([1, 3]) == 3
    assert torsion_annihilator_exponent([]) == 0


def test_pre_reduce_trefoil():
    c = build_cube(TREFOIL)
    red = pre_reduce(c)
    assert red.reduced.n <= 10
    assert red.reduced.check_d_squared()
    r = homology(c)
    for fg in r.free_generators:
        back = red.include(red.project(fg.chain))
        assert c.differential(back) == {}
        assert r.free_coordinates(back) == r.free_coordinates(fg.chain)


def test_pre_reduce_unit_pair_and_fixed_point():
    # 0 -> g0 --1--> g1 -> 0 cancels entirely
    c = ChainComplex([0, 1], SparseMatrix(2, 2, [(1, 0, ONE)]))
    assert pre_reduce(c).reduced.n == 0
    c2 = ChainComplex([0, 1], SparseMatrix(2, 2, [(1, 0, L)]))
    r2 = pre_reduce(c2)
    assert r2.reduced.n == 2 and r2.reduced.d == c2.d
    assert homology(c2).torsion == [1]


def summary(r):
    return sorted((h, g.free_rank, tuple(g.torsion), tuple(sorted(fg.q for fg in g.free_generators)))
                  for h, g in r.groups.items() if g.free_rank or g.torsion)


@pytest.mark.parametrize("name", ["3_1", "4_1", "5_1", "5_2", "6_1"])
def test_pre_reduce_preserves_homology(name):
    c = build_cube(table_lookup(name))
    assert summary(homology(c, reduce=True)) == summary(homology(c, reduce=False))


def random_complex(rng):
    # a random complex C0 -> C1 -> C2 built as d = B A with B A = 0 forced by construction
    n0, n1, n2 = rng.randint(1, 3), rng.randint(2, 4), rng.randint(1, 3)
    pool = [ZERO, ONE, -ONE, L, 2 * L, lam(2), 1 + L]
    A = [[rng.choice(pool) for _ in range(n0)] for _ in range(n1)]
    # rows of B annihilate the columns of A: take B from the left kernel via Smith
    sf = smith_reduce(A, n0)
    left = [sf.U[i] for i in range(sf.rank, n1)]
    coef = [[rng.choice(pool) for _ in left] for _ in range(n2)]
    B = [[sum((coef[i][k] * left[k][j] for k in range(len(left))), ZERO) for j in range(n1)]
         for i in range(n2)]
    h = [0] * n0 + [1] * n1 + [2] * n2
    d = SparseMatrix(len(h), len(h))
    for i in range(n1):
        for j in range(n0):
            d.add(n0 + i, j, A[i][j])
    for i in range(n2):
        for j in range(n1):
            d.add(n0 + n1 + i, n0 + j, B[i][j])
    return ChainComplex(h, d)


def evaluate(x, t):
    if x.is_zero:
        return Fraction(0)
    num = sum((c * t**i for i, c in enumerate(x.numerator)), Fraction(0))
    den = sum((c * t**i for i, c in enumerate(x.denominator)), Fraction(0))
    return num / den


def field_rank(rows, ncols, t):
    M = [[evaluate(x, t) for x in r] for r in rows]
    rank, col = 0, 0
    while rank < len(M) and col < ncols:
        piv = next((i for i in range(rank, len(M)) if M[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
        col += 1
    return rank


def generic_betti(c, h):
    ts = [Fraction(3, 7), Fraction(-5, 11)]
    src, _, out = c.block(h)
    psrc, _, inc = c.block(h - 1)
    r_out = max(field_rank(out, len(src), t) for t in ts) if src else 0
    r_in = max(field_rank(inc, len(psrc), t) for t in ts) if psrc else 0
    return len(src) - r_out - r_in


@given(st.randoms(use_true_random=False))
def test_free_rank_matches_fraction_field_oracle(rng):
    c = random_complex(rng)
    assert c.check_d_squared()
    r = homology(c)
    for h in (0, 1, 2):
        g = r.groups.get(h)
        assert (g.free_rank if g else 0) == generic_betti(c, h)


@pytest.mark.parametrize("name", ["3_1", "4_1", "5_1"])
def test_free_rank_oracle_on_knots(name):
    c = build_cube(table_lookup(name))
    r = homology(c)
    for h in set(c.h):
        g = r.groups.get(h)
        assert (g.free_rank if g else 0) == generic_betti(c, h)


@pytest.mark.parametrize("name", ["3_1", "4_1", "5_2", "6_2"])
def test_lee_cross_check(name):
    c = build_cube(table_lookup(name))
    assert homology(c).free_rank == homology(specialize_lee(c)).free_rank == 2


@pytest.mark.parametrize("name", ["3_1", "5_2", "6_2"])
def test_mirror_duality(name):
    d = table_lookup(name)
    r, rm = homology(build_cube(d)), homology(build_cube(mirror(d)))
    assert r.free_rank == rm.free_rank
    assert sorted(fg.q for fg in rm.free_generators) == sorted(-fg.q for fg in r.free_generators)
    assert sorted(fg.gr % 4 for fg in rm.free_generators) == sorted(-fg.gr % 4 for fg in r.free_generators)


def test_free_generators_are_q_homogeneous_cycles(knot_table):
    for rec in knot_table[:10]:
        c = build_cube(rec.diagram)
        for fg in homology(c).free_generators:
            assert c.differential(fg.chain) == {}
            assert c.chain_q(fg.chain) == fg.q


def test_free_coordinates_of_generators():
    c = build_cube(TREFOIL)
    r = homology(c)
    gens = r.free_generators
    for i, fg in enumerate(gens):
        coords = r.free_coordinates(chain := fg.chain)
        assert coords == [ONE if j == i else ZERO for j in range(len(gens))]
        assert r.free_coordinates({k: v * lam(3) for k, v in chain.items()})[i] == lam(3)


def test_report_serialisation():
    r = homology(build_cube(TREFOIL))
    data = r.to_json()
    assert data["free_rank"] == 2 and data["torsion_annihilator_exponent"] == 2
    assert r.to_csv().splitlines()[0] == "h,q,free,torsion"
