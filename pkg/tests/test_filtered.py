import pytest
from hypothesis import given, strategies as st

from khlambda.cube import PLUS, build_cube
from khlambda.diagram import UNKNOT, table_lookup
from khlambda.dvr import ONE, lam
from khlambda.filtered import (
    FilteredComplex, PerturbedMapPair, WitnessError, check_identity, clean_representative, conjugate_perturb,
    conjugate_with, discover_witnesses, e1_page, leading_term_law, perturb_run, valuation_inequality_check,
)
from khlambda.homology import ChainComplex, InvariantViolation, SparseMatrix, chain_scale, homology
from khlambda.movies import builtin_movies, compose_movie

TREFOIL_CUBE = build_cube(table_lookup("3_1"))
UNKNOT_CUBE = build_cube(UNKNOT)


def summary(r):
    return sorted((h, g.free_rank, tuple(g.torsion)) for h, g in r.groups.items() if g.free_rank or g.torsion)


def test_identity_conjugation_is_trivial():
    f = conjugate_with(TREFOIL_CUBE, SparseMatrix(TREFOIL_CUBE.n, TREFOIL_CUBE.n))
    assert f.D == TREFOIL_CUBE.d
    assert f.x.is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_unknot_stays_rank_two(seed):
    f = conjugate_perturb(UNKNOT_CUBE, seed)
    r = homology(f.as_complex())
    assert r.free_rank == 2 and r.torsion == []


@pytest.mark.parametrize("seed", range(5))
def test_trefoil_homology_is_conjugation_invariant(seed):
    f = conjugate_perturb(TREFOIL_CUBE, seed)
    f.check()
    assert not f.x.is_zero()
    ref = homology(TREFOIL_CUBE)
    assert e1_page(f).to_json() == ref.to_json()
    hD = homology(f.as_complex())
    assert (hD.free_rank, hD.torsion) == (ref.free_rank, ref.torsion)


def test_one_generator_e1():
    f = FilteredComplex([0], SparseMatrix(1, 1))
    r = e1_page(f)
    assert r.free_rank == 1 and r.groups[0].free_rank == 1


@given(st.integers(min_value=0, max_value=10**6))
def test_perturbation_shape(seed):
    f = conjugate_perturb(TREFOIL_CUBE, seed)
    assert (f.D @ f.D).is_zero()
    for r, c, _ in f.x.items():
        gap = f.h[r] - f.h[c]
        assert gap >= 3 and gap % 2 == 1
        assert (TREFOIL_CUBE.gr(r) - TREFOIL_CUBE.gr(c)) % 4 == 3


@given(st.integers(min_value=0, max_value=10**6))
def test_leading_term_law(seed):
    assert leading_term_law(conjugate_perturb(TREFOIL_CUBE, seed), seed)


def test_non_filtered_differential_is_rejected():
    with pytest.raises(InvariantViolation):
        FilteredComplex([0, 0], SparseMatrix(2, 2, [(1, 0, ONE)]))


def three_generators(coef):
    # x in h = -2, y in h = -1, z in h = 0; d x = coef * y, z a cycle
    return FilteredComplex([-2, -1, 0], SparseMatrix(3, 3, [(1, 0, coef)]))


def test_clean_witnesses_are_left_alone():
    f = three_generators(ONE)
    a, b = {2: lam(2)}, {2: ONE}
    res = clean_representative(f, a, 0, 2, b, {})
    assert (res.k, res.b, res.c, res.iterations) == (2, b, {}, [])


def test_exact_leading_term_is_lifted_in_one_step():
    f = three_generators(ONE)
    k, m = 1, 0
    a = {2: lam(1)}
    b = {1: ONE, 2: ONE}
    c = {0: -lam(1)}
    assert check_identity(f, a, k + m, b, c)
    res = clean_representative(f, a, m, k, b, c)
    assert res.iterations == [{"step": "b", "level": -1, "l": 0}]
    assert res.b == {2: ONE} and res.c == {}
    assert (res.k, res.deficit) == (1, 0)


def test_torsion_leading_term_costs_a_deficit():
    # lambda y = d x: the b-step multiplies a by lambda but leaves b paired with lambda^(k+m)
    f = three_generators(lam(1))
    k, m = 1, 0
    a = {2: lam(1)}
    b = {1: ONE, 2: ONE}
    c = {0: -ONE}
    assert check_identity(f, a, k + m, b, c)
    res = clean_representative(f, a, m, k, b, c)
    assert res.iterations == [{"step": "b", "level": -1, "l": 1}]
    assert (res.k, res.deficit, res.exponent) == (2, 1, 1)
    assert f.in_filtration(res.b, 0) and f.in_filtration(res.c, -1)
    assert check_identity(f, res.a, res.exponent, res.b, res.c)


def test_c_step():
    # c has a cycle component in h = -2 that is d-exact from h = -3
    f = FilteredComplex([-3, -2, -1, 0], SparseMatrix(4, 4, [(1, 0, ONE)]))
    a = {3: ONE}
    b = {3: ONE}
    c = {1: ONE}
    assert check_identity(f, a, 0, b, c)
    res = clean_representative(f, a, 0, 0, b, c)
    assert res.c == {} and res.b == {3: ONE}
    assert [it["step"] for it in res.iterations] == ["c"]


def test_bad_witnesses_are_rejected():
    f = three_generators(ONE)
    with pytest.raises(WitnessError):
        clean_representative(f, {2: ONE}, 0, 0, {2: 2 * ONE}, {})
    with pytest.raises(WitnessError):
        clean_representative(f, {1: ONE}, 0, 0, {1: ONE}, {})


@pytest.fixture(scope="module")
def trefoil_movie():
    comp = compose_movie(builtin_movies()["trefoil_seifert"])
    return comp, homology(comp.end_cube)


def test_unperturbed_pair_has_equal_valuations(trefoil_movie):
    comp, _ = trefoil_movie
    f = conjugate_with(comp.end_cube, SparseMatrix(comp.end_cube.n, comp.end_cube.n))
    pair = PerturbedMapPair.from_conjugation(comp.start_cube, comp.matrix, f)
    pair.check(f)
    rep = valuation_inequality_check(f, pair, comp.start_cube.index(0, PLUS))
    assert rep["m_plus"] == rep["m_sharp_plus"] == 0


def test_map_pair_rejects_non_units(trefoil_movie):
    comp, _ = trefoil_movie
    f = conjugate_perturb(comp.end_cube, 0)
    with pytest.raises(ValueError):
        PerturbedMapPair.from_conjugation(comp.start_cube, comp.matrix, f, lam(1))


@pytest.mark.parametrize("seed", range(4))
def test_perturbed_trefoil_runs(trefoil_movie, seed):
    comp, ref = trefoil_movie
    run = perturb_run(comp.start_cube, comp.end_cube, comp.matrix, seed, ref)
    assert run["ok"]
    for chk in run["checks"].values():
        assert chk["m_plus"] >= chk["m_sharp_plus"]
        assert chk["clean"]["deficit"] == 0


@pytest.mark.parametrize("seed", range(3))
def test_discovered_witnesses_satisfy_the_identity(trefoil_movie, seed):
    comp, _ = trefoil_movie
    f = conjugate_perturb(comp.end_cube, seed)
    pair = PerturbedMapPair.from_conjugation(comp.start_cube, comp.matrix, f)
    a = chain_scale(pair.psi_sharp.column(comp.start_cube.index(0, PLUS)), lam(2))
    m, b, c = discover_witnesses(f, a, 2)
    assert check_identity(f, a, 2 + m, b, c)
    res = clean_representative(f, a, m, 2, b, c)
    assert f.in_filtration(res.b, 0) and f.in_filtration(res.c, -1)
    assert res.deficit >= 0
    assert check_identity(f, res.a, res.exponent, res.b, res.c)
