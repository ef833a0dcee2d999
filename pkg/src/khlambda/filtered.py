"""Filtered perturbations D = d + x of a Khovanov complex.

D is synthesized as P d P^-1 with P = 1 + N, where N raises h by a positive
even amount and preserves gr mod 4.  Then x = D - d raises h by an odd
amount >= 3, D^2 = 0, and the associated graded of D is d.  Homology of D
is taken with respect to h mod 2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .dvr import INF, ONE, ZERO, DvrScalar, lam
from .homology import (
    ChainComplex,
    HomologyReport,
    InvariantViolation,
    SparseMatrix,
    _acc,
    chain_add,
    chain_scale,
    exactness_power,
    homology,
    solve_linear,
    torsion_annihilator_exponent,
)

ENTRY_POOL = (
    DvrScalar(1), DvrScalar(-1), DvrScalar(2), DvrScalar(-3),
    lam(1), -lam(1), 2 * lam(1), lam(2),
    1 + lam(1), 1 - 2 * lam(1), ONE / (1 - lam(1)), lam(1) / (2 + lam(1)),
)


class WitnessError(ValueError):
    """The witness identity a = lambda^(k+m) b + D c cannot be met."""


class FilteredComplex:
    """Generators with an h-grading and a differential D raising h by >= 1."""

    def __init__(self, h: list[int], D: SparseMatrix, base: ChainComplex | None = None,
                 P: SparseMatrix | None = None, P_inv: SparseMatrix | None = None):
        self.h = list(h)
        self.D = D
        self.base = base
        self.P = P
        self.P_inv = P_inv
        for r, c, _ in D.items():
            if self.h[r] <= self.h[c]:
                raise InvariantViolation("D must strictly raise h")

    @property
    def n(self) -> int:
        return len(self.h)

    @property
    def d(self) -> SparseMatrix:
        """Leading part: entries raising h by exactly one."""
        return SparseMatrix(self.n, self.n,
                            ((r, c, v) for r, c, v in self.D.items() if self.h[r] == self.h[c] + 1))

    @property
    def x(self) -> SparseMatrix:
        return SparseMatrix(self.n, self.n,
                            ((r, c, v) for r, c, v in self.D.items() if self.h[r] > self.h[c] + 1))

    def check(self) -> None:
        if not (self.D @ self.D).is_zero():
            raise InvariantViolation("D^2 != 0")
        if not (self.d @ self.d).is_zero():
            raise InvariantViolation("d^2 != 0")
        for r, c, _ in self.x.items():
            if (self.h[r] - self.h[c]) % 2 == 0:
                raise InvariantViolation("x has a term of even h-degree")

    def as_complex(self) -> ChainComplex:
        return ChainComplex(self.h, self.D, None, period=2)

    def leading_complex(self) -> ChainComplex:
        q0 = self.base.q0 if self.base is not None else None
        return ChainComplex(self.h, self.d, q0)

    def apply(self, chain: dict) -> dict:
        return self.D.apply(chain)

    def apply_leading(self, chain: dict) -> dict:
        return self.d.apply(chain)

    def level(self, chain: dict):
        """Largest i with the chain in F^i (INF for zero)."""
        return min((self.h[g] for g in chain), default=INF)

    def component(self, chain: dict, h: int) -> dict:
        return {g: v for g, v in chain.items() if self.h[g] == h}

    def in_filtration(self, chain: dict, i: int) -> bool:
        lv = self.level(chain)
        return lv is INF or lv >= i


def conjugate_with(c: ChainComplex, N: SparseMatrix) -> FilteredComplex:
    """D = (1 + N) d (1 + N)^-1 for a strictly h-raising N."""
    for r, col, _ in N.items():
        if c.h[r] <= c.h[col]:
            raise ValueError("N must strictly raise h")
    I = SparseMatrix.identity(c.n)
    P = I + N
    P_inv = I.copy()
    term = I
    neg = N.scale(-1)
    while True:
        term = neg @ term
        if term.is_zero():
            break
        P_inv = P_inv + term
    D = P @ c.d @ P_inv
    return FilteredComplex(c.h, D, c, P, P_inv)


def random_perturbation(c: ChainComplex, seed, density: float = 0.35) -> SparseMatrix:
    rng = random.Random(seed)
    N = SparseMatrix(c.n, c.n)
    for col in range(c.n):
        for r in range(c.n):
            gap = c.h[r] - c.h[col]
            if gap < 2 or gap % 2:
                continue
            if c.q0 is not None and (c.gr(r) - c.gr(col)) % 4:
                continue
            if rng.random() < density:
                N.set(r, col, rng.choice(ENTRY_POOL))
    return N


def conjugate_perturb(c: ChainComplex, seed, density: float = 0.35) -> FilteredComplex:
    """Seeded filtered conjugation of ``c``."""
    return conjugate_with(c, random_perturbation(c, seed, density))


def e1_page(f: FilteredComplex) -> HomologyReport:
    """Homology of the associated graded (C, d), graded by h."""
    return homology(f.leading_complex())


# -- the map pair ---------------------------------------------------------------------

@dataclass
class PerturbedMapPair:
    """Psi: (A, d_A) -> (C, d) and Psi# = a P Psi: (A, d_A) -> (C, D)."""

    source: ChainComplex
    psi: SparseMatrix
    psi_sharp: SparseMatrix
    unit: DvrScalar

    @classmethod
    def from_conjugation(cls, source: ChainComplex, psi: SparseMatrix, f: FilteredComplex, unit=ONE):
        if f.P is None:
            raise ValueError("filtered complex carries no conjugation data")
        unit = DvrScalar(unit)
        if not unit.is_unit:
            raise ValueError("a must be a unit")
        return cls(source, psi, (f.P @ psi).scale(unit), unit)

    def check(self, f: FilteredComplex) -> None:
        if not f.base.d @ self.psi == self.psi @ self.source.d:
            raise InvariantViolation("Psi is not a chain map for d")
        if not f.D @ self.psi_sharp == self.psi_sharp @ self.source.d:
            raise InvariantViolation("Psi# is not a chain map for D")
        X = self.psi_sharp - self.psi.scale(self.unit)
        for r, c, _ in X.items():
            if f.h[r] <= self.source.h[c]:
                raise InvariantViolation("X does not strictly raise h")


# -- cleaning ---------------------------------------------------------------------------

def _dense_block(M: SparseMatrix, rows: list[int], cols: list[int]):
    rpos = {g: i for i, g in enumerate(rows)}
    out = [[ZERO] * len(cols) for _ in rows]
    for j, g in enumerate(cols):
        for r, v in M.column(g).items():
            if r in rpos:
                out[rpos[r]][j] = v
    return out


def _solve_leading(f: FilteredComplex, target: dict, h: int):
    """(l, beta): lambda^l target = d beta with beta in degree h - 1, l minimal."""
    src = [g for g in range(f.n) if f.h[g] == h - 1]
    tgt = [g for g in range(f.n) if f.h[g] == h]
    A = _dense_block(f.d, tgt, src)
    rhs = [target.get(g, ZERO) for g in tgt]
    l = exactness_power(A, rhs, len(src)) if tgt else 0
    if l is None:
        raise WitnessError(f"leading term in h = {h} is not d-torsion")
    sol = solve_linear(A, [x * lam(l) for x in rhs], len(src))
    beta = {src[i]: v for i, v in enumerate(sol) if not v.is_zero}
    return l, beta


@dataclass
class CleanResult:
    a: dict
    b: dict
    c: dict
    k: int
    m: int
    deficit: int
    iterations: list = field(default_factory=list)

    @property
    def exponent(self) -> int:
        """Power of lambda in front of b in the final identity."""
        return self.k + self.m - self.deficit

    def to_json(self) -> dict:
        return {
            "k": self.k, "m": self.m, "deficit": self.deficit,
            "iterations": self.iterations,
        }


def check_identity(f: FilteredComplex, a: dict, power: int, b: dict, c: dict) -> bool:
    rhs = chain_add(chain_scale(b, lam(power)), f.apply(c))
    return chain_add(a, rhs, DvrScalar(-1)) == {}


def clean_representative(f: FilteredComplex, a: dict, m: int, k: int, b: dict, c: dict,
                         max_power: int | None = None) -> CleanResult:
    """Move the witnesses of a = lambda^(k+m) b + D c into F^0 and F^-1.

    Each step multiplies the identity by the least lambda^l making the
    offending leading term d-exact.  A b-step with l > 0 leaves b paired
    with lambda^(k+m) while a gains lambda^l, so the final identity reads
    a_k' = lambda^(k'+m-deficit) b + D c; ``deficit`` records the total.
    """
    if not f.in_filtration(a, 0):
        raise WitnessError("a must lie in F^0")
    if not check_identity(f, a, k + m, b, c):
        raise WitnessError("input does not satisfy a = lambda^(k+m) b + D c")
    h_lo, h_hi = (min(f.h), max(f.h)) if f.n else (0, 0)
    if max_power is None:
        base = f.base if f.base is not None else f.leading_complex()
        tors = torsion_annihilator_exponent(homology(base))
        max_power = max(1, tors) * (h_hi - h_lo + 2)
    power = k + m  # exponent in front of b
    spent, deficit = 0, 0
    log = []
    while not f.in_filtration(b, 0):
        n = -f.level(b)
        lead = f.component(b, -n)
        if f.apply_leading(lead):
            raise InvariantViolation("leading term of b is not a d-cycle")
        l, beta = _solve_leading(f, lead, -n)
        # a_{k+l} = lambda^power (lambda^l b - D beta) + D(lambda^l c + lambda^power beta)
        s = lam(l)
        b = chain_add(chain_scale(b, s), f.apply(beta), DvrScalar(-1))
        c = chain_add(chain_scale(c, s), chain_scale(beta, lam(power)))
        a = chain_scale(a, s)
        spent += l
        deficit += l
        log.append({"step": "b", "level": -n, "l": l})
        if spent > max_power:
            raise WitnessError("lambda-power budget exhausted")
    while not f.in_filtration(c, -1):
        n = -f.level(c)
        lead = f.component(c, -n)
        if f.apply_leading(lead):
            raise InvariantViolation("leading term of c is not a d-cycle")
        l, gamma = _solve_leading(f, lead, -n)
        s = lam(l)
        c = chain_add(chain_scale(c, s), f.apply(gamma), DvrScalar(-1))
        b = chain_scale(b, 1)
        a = chain_scale(a, s)
        power += l
        spent += l
        log.append({"step": "c", "level": -n, "l": l})
        if spent > max_power:
            raise WitnessError("lambda-power budget exhausted")
    k_final = k + spent
    res = CleanResult(a, b, c, k_final, m, deficit, log)
    if not check_identity(f, a, res.exponent, b, c):
        raise InvariantViolation("cleaning broke the witness identity")
    return res


# -- witnesses and the inequality ----------------------------------------------------

def _free_part(report: HomologyReport, chain: dict, h: int):
    coords = report.free_coordinates(chain, h)
    val = min((x.valuation for x in coords), default=INF)
    return coords, val


def _solve_D(f: FilteredComplex, r: dict) -> dict:
    parity = {f.h[g] % 2 for g in r}
    if not parity:
        return {}
    if len(parity) > 1:
        raise WitnessError("right-hand side mixes h-parities")
    p = parity.pop()
    tgt = [g for g in range(f.n) if f.h[g] % 2 == p]
    src = [g for g in range(f.n) if f.h[g] % 2 != p]
    A = _dense_block(f.D, tgt, src)
    sol = solve_linear(A, [r.get(g, ZERO) for g in tgt], len(src))
    if sol is None:
        raise WitnessError("a - lambda^(k+m) b is not D-exact")
    return {src[i]: v for i, v in enumerate(sol) if not v.is_zero}


def conjugation_witnesses(f: FilteredComplex, pair: PerturbedMapPair, label_index: int, k: int,
                          rng: random.Random | None = None):
    """(a_k, m, b, c) built from the d-homology and the conjugation P.

    With ``rng`` the witnesses are polluted by D-boundaries from the lowest
    h-degrees, which pushes b and c out of F^0 and F^-1.
    """
    hd = homology(f.base)
    psi_col = pair.psi.column(label_index)
    coords, m = _free_part(hd, psi_col, 0)
    if m is INF:
        raise WitnessError("Psi(v) has no free part")
    zs = [fg.chain for fg in hd.groups[0].free_generators]
    b = {}
    for cf, z in zip(coords, zs):
        if not cf.is_zero:
            b = chain_add(b, f.P.apply(z), pair.unit * cf.divide_exact(lam(m)))
    a = chain_scale(pair.psi_sharp.column(label_index), lam(k))
    r = chain_add(a, chain_scale(b, lam(k + m)), DvrScalar(-1))
    c = _solve_D(f, r)
    if rng is not None:
        lo = min(f.h)
        beta = _random_chain(f, rng, [lo, lo + 1])
        gamma = _random_chain(f, rng, [lo, lo + 1])
        b = chain_add(b, f.apply(beta))
        c = chain_add(chain_add(c, chain_scale(beta, -lam(k + m))), f.apply(gamma))
    return a, m, b, c


def discover_witnesses(f: FilteredComplex, a: dict, k: int):
    """(m, b, c) from the D-homology alone, with m the divisibility of [a] beyond lambda^k."""
    hD = homology(f.as_complex())
    parity = {f.h[g] % 2 for g in a} or {0}
    coords, val = _free_part(hD, a, parity.pop())
    if val is INF:
        raise WitnessError("class has no free part")
    m = val - k
    power = k + m
    gens = [fg.chain for fg in hD.free_generators if fg.h == (f.h[next(iter(a))] % 2)]
    b = {}
    for cf, z in zip(coords, gens):
        if not cf.is_zero:
            b = chain_add(b, z, cf.divide_exact(lam(power)))
    r = chain_add(a, chain_scale(b, lam(power)), DvrScalar(-1))
    return m, b, _solve_D(f, r)


def _random_chain(f: FilteredComplex, rng: random.Random, levels) -> dict:
    out = {}
    for g in range(f.n):
        if f.h[g] in levels and rng.random() < 0.5:
            out[g] = rng.choice(ENTRY_POOL)
    return out


def valuation_inequality_check(f: FilteredComplex, pair: PerturbedMapPair, label_index: int = 0,
                               seed=None, k: int | None = None) -> dict:
    """m+ from d-homology, m#+ from D-homology, and a cleaned witness.

    Asserts m+ >= m#+ and that the cleaned identity has b in F^0, c in F^-1
    and leading term a_k = lambda^(k+m-deficit) b_0 + d c_-1.
    """
    hd = homology(f.base)
    hD = homology(f.as_complex())
    col = pair.psi.column(label_index)
    col_sharp = pair.psi_sharp.column(label_index)
    _, m_plus = _free_part(hd, col, 0)
    _, m_sharp = _free_part(hD, col_sharp, 0)
    if k is None:
        k = max(torsion_annihilator_exponent(hd), torsion_annihilator_exponent(hD))
    rng = random.Random(seed) if seed is not None else None
    a, m, b, c = conjugation_witnesses(f, pair, label_index, k, rng)
    res = clean_representative(f, a, m_sharp, k, b, c) if m == m_sharp else None
    if res is None:
        raise InvariantViolation(f"conjugation witness exponent {m} != m#+ {m_sharp}")
    if not (f.in_filtration(res.b, 0) and f.in_filtration(res.c, -1)):
        raise InvariantViolation("cleaned witnesses are not in F^0 / F^-1")
    a0 = f.component(res.a, 0)
    lead = chain_add(chain_scale(f.component(res.b, 0), lam(res.exponent)),
                     f.apply_leading(f.component(res.c, -1)))
    if chain_add(a0, lead, DvrScalar(-1)):
        raise InvariantViolation("leading identity a_k = lambda^(k+m) b + d c fails")
    ok = m_plus >= m_sharp
    if not ok:
        raise InvariantViolation(f"m+ = {m_plus} < m#+ = {m_sharp}")
    return {
        "seed": seed,
        "m_plus": m_plus,
        "m_sharp_plus": m_sharp,
        "equal": m_plus == m_sharp,
        "k": k,
        "clean": res.to_json(),
        "ok": ok,
    }


def random_cycle(f: FilteredComplex, rng: random.Random) -> dict:
    """A D-cycle in F^0: D of a random chain in F^-1, plus P of a d-cycle at h = 0."""
    lo = [h for h in set(f.h) if h >= -1]
    z = f.apply(_random_chain(f, rng, lo))
    if f.P is not None and f.base is not None:
        grp = homology(f.base).groups.get(0)
        for fg in grp.free_generators if grp else []:
            z = chain_add(z, f.P.apply(fg.chain), rng.choice(ENTRY_POOL))
    return z


def leading_term_law(f: FilteredComplex, seed=0, trials: int = 5) -> bool:
    """For D-cycles z in F^0 the h = 0 part is a d-cycle."""
    rng = random.Random(seed)
    for _ in range(trials):
        z = random_cycle(f, rng)
        if f.apply(z):
            raise InvariantViolation("random_cycle produced a non-cycle")
        if not f.in_filtration(z, 0):
            raise InvariantViolation("random_cycle left F^0")
        if f.apply_leading(f.component(z, 0)):
            return False
    return True


def _summary(r: HomologyReport) -> dict:
    return {"free_rank": r.free_rank, "torsion": r.torsion}


def perturb_run(source: ChainComplex, target: ChainComplex, psi: SparseMatrix, seed,
                reference: HomologyReport | None = None, density: float = 0.35) -> dict:
    """One seeded run: conjugate, compare E1 and H(D) with H(d), clean, compare m+ and m#+."""
    ref = reference or homology(target)
    f = conjugate_perturb(target, seed, density)
    f.check()
    e1 = e1_page(f)
    if e1.to_json() != ref.to_json():
        raise InvariantViolation(f"seed {seed}: E1 page differs from Kh")
    hD = homology(f.as_complex())
    if _summary(hD) != _summary(ref):
        raise InvariantViolation(f"seed {seed}: H(D) differs from H(d)")
    if not leading_term_law(f, seed):
        raise InvariantViolation(f"seed {seed}: leading term of a D-cycle is not a d-cycle")
    unit = random.Random(seed).choice([u for u in ENTRY_POOL if u.is_unit])
    pair = PerturbedMapPair.from_conjugation(source, psi, f, unit)
    pair.check(f)
    checks = {}
    for name, label in (("plus", 0), ("minus", 1)):
        idx = source.index(0, label) if hasattr(source, "index") else label
        checks[name] = valuation_inequality_check(f, pair, idx, seed=seed)
    return {
        "seed": seed,
        "levels": sorted(set(f.h)),
        "perturbation_nnz": f.x.nnz,
        "homology": _summary(hD),
        "checks": checks,
        "ok": all(c["ok"] for c in checks.values()),
    }
