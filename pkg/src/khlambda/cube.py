"""The cube of resolutions with the lambda-deformed Frobenius algebra.

Generators at a vertex are labelings of its circles by v+ (label 0) and
v- (label 1), packed into a bitmask: bit ``j`` set means circle ``j`` (in
canonical order, by smallest arc) carries v-.  The differential runs along
cube edges from a vertex with a 1 in some coordinate to the vertex with a 0
there, using m on merges and Delta on splits.
"""

from __future__ import annotations

import json

from .diagram import (
    DEFAULT_GENERATOR_BUDGET,
    BudgetExceeded,
    PlanarDiagram,
    as_bits,
    as_tuple,
    circles_at,
)
from .dvr import LAMBDA, ONE, ZERO, DvrScalar, format_scalar
from .homology import ChainComplex, SparseMatrix

PLUS, MINUS = 0, 1


class FrobeniusAlgebra:
    """Rank-two algebra with v-^2 = t v+; the cube uses t = lambda^2."""

    def __init__(self, t: DvrScalar = LAMBDA**2):
        self.t = DvrScalar(t)

    def m(self, a: int, b: int) -> list[tuple[DvrScalar, int]]:
        if a == PLUS:
            return [(ONE, b)]
        if b == PLUS:
            return [(ONE, a)]
        return [(self.t, PLUS)]

    def delta(self, a: int) -> list[tuple[DvrScalar, tuple[int, int]]]:
        if a == PLUS:
            return [(ONE, (PLUS, MINUS)), (ONE, (MINUS, PLUS))]
        return [(ONE, (MINUS, MINUS)), (self.t, (PLUS, PLUS))]

    unit = PLUS

    @staticmethod
    def counit(a: int) -> DvrScalar:
        return ONE if a == MINUS else ZERO

    @staticmethod
    def degree(a: int) -> int:
        return 1 if a == PLUS else -1

    # vector-level helpers on dicts {label tuple: scalar}

    def apply_m(self, vec: dict, i: int = 0) -> dict:
        """Multiply tensor factors i and i+1."""
        out: dict = {}
        for labels, c in vec.items():
            for s, l in self.m(labels[i], labels[i + 1]):
                key = labels[:i] + (l,) + labels[i + 2:]
                out[key] = out.get(key, ZERO) + c * s
        return {k: v for k, v in out.items() if not v.is_zero}

    def apply_delta(self, vec: dict, i: int = 0) -> dict:
        out: dict = {}
        for labels, c in vec.items():
            for s, pair in self.delta(labels[i]):
                key = labels[:i] + pair + labels[i + 1:]
                out[key] = out.get(key, ZERO) + c * s
        return {k: v for k, v in out.items() if not v.is_zero}

    def frobenius_identities_hold(self) -> bool:
        """(m x id)(id x Delta) = Delta m = (id x m)(Delta x id), plus
        commutativity, cocommutativity, unit and counit laws."""
        for a in (PLUS, MINUS):
            for b in (PLUS, MINUS):
                v = {(a, b): ONE}
                lhs = self.apply_m(self.apply_delta(v, 1), 0)
                mid = self.apply_delta(self.apply_m(v, 0), 0)
                rhs = self.apply_m(self.apply_delta(v, 0), 1)
                if not (lhs == mid == rhs):
                    return False
                if self.m(a, b) != self.m(b, a):
                    return False
            dv = self.apply_delta({(a,): ONE})
            swapped = {(y, x): c for (x, y), c in dv.items()}
            if dv != swapped:
                return False
            if self.m(self.unit, a) != [(ONE, a)]:
                return False
            # (counit x id) Delta = id
            back: dict = {}
            for (x, y), c in dv.items():
                s = self.counit(x) * c
                if not s.is_zero:
                    back[(y,)] = back.get((y,), ZERO) + s
            if {k: v for k, v in back.items() if not v.is_zero} != {(a,): ONE}:
                return False
        return True


LAMBDA_ALGEBRA = FrobeniusAlgebra()


def edge_sign(v, u) -> int:
    """(-1)^(number of 1s of v before the flipped coordinate)."""
    v, u = tuple(v), tuple(u)
    if len(v) != len(u):
        raise ValueError("vertices of different dimension")
    diff = [i for i in range(len(v)) if v[i] != u[i]]
    if len(diff) != 1 or v[diff[0]] != 1:
        raise ValueError(f"({v}, {u}) is not a cube edge with v > u")
    i = diff[0]
    return -1 if sum(v[:i]) % 2 else 1


def _edge_sign_bits(v: int, i: int) -> int:
    return -1 if bin(v & ((1 << i) - 1)).count("1") % 2 else 1


def _edge_pattern(cv, cu):
    """Match circles of v with circles of u across one smoothing change.

    Returns (kind, touched_v, touched_u, untouched map v->u).
    """
    loc_u = {}
    for k, circ in enumerate(cu):
        for a in circ:
            loc_u[a] = k
    same = {}
    touched_v = []
    used_u = set()
    for j, circ in enumerate(cv):
        ks = {loc_u[a] for a in circ}
        if len(ks) == 1:
            k = ks.pop()
            if cu[k] == circ:
                same[j] = k
                used_u.add(k)
                continue
        touched_v.append(j)
    touched_u = [k for k in range(len(cu)) if k not in used_u]
    if len(touched_v) == 2 and len(touched_u) == 1:
        return "merge", touched_v, touched_u, same
    if len(touched_v) == 1 and len(touched_u) == 2:
        return "split", touched_v, touched_u, same
    raise AssertionError("cube edge neither merges nor splits")


class CubeComplex(ChainComplex):
    """Khovanov cube complex C(D) over the DVR."""

    def __init__(self, diagram: PlanarDiagram, algebra: FrobeniusAlgebra, circles, offsets, gens, h, q0, d):
        super().__init__(h, d, q0)
        self.diagram = diagram
        self.algebra = algebra
        self.circles = circles  # per vertex bits
        self.offsets = offsets
        self.generators = gens  # (vertex bits, label mask)

    def index(self, vertex, labels) -> int:
        """Generator index from a vertex and a label mask (or label tuple)."""
        v = as_bits(self.diagram, vertex) if not isinstance(vertex, int) else vertex
        if not isinstance(labels, int):
            labels = sum(b << j for j, b in enumerate(labels))
        if not 0 <= labels < (1 << len(self.circles[v])):
            raise ValueError("label mask out of range")
        return self.offsets[v] + labels

    def generator(self, i: int) -> dict:
        v, mask = self.generators[i]
        n = self.diagram.n_crossings
        p = len(self.circles[v])
        return {
            "vertex": as_tuple(n, v),
            "labels": tuple("v-" if (mask >> j) & 1 else "v+" for j in range(p)),
            "h": self.h[i],
            "q": self.q0[i],
            "gr": self.gr(i),
        }

    def state(self, i: int) -> tuple[int, dict]:
        """(vertex bits, {circle arcset: label}) of generator i."""
        v, mask = self.generators[i]
        return v, {c: (mask >> j) & 1 for j, c in enumerate(self.circles[v])}

    def index_of_state(self, v: int, labels: dict) -> int:
        circs = self.circles[v]
        mask = 0
        for j, c in enumerate(circs):
            lab = labels[c]
            mask |= lab << j
        if len(labels) != len(circs):
            raise KeyError("state does not match the resolution")
        return self.offsets[v] + mask

    def to_json(self) -> dict:
        gens = []
        for i in range(self.n):
            g = self.generator(i)
            gens.append({
                "index": i,
                "vertex": list(g["vertex"]),
                "labels": list(g["labels"]),
                "h": g["h"], "q": g["q"], "gr": g["gr"],
            })
        return {
            "pd": self.diagram.to_pd(),
            "n_plus": self.diagram.n_plus,
            "n_minus": self.diagram.n_minus,
            "generators": gens,
            "differential": [[r, c, format_scalar(v)] for r, c, v in self.d.items()],
        }

    def dump_json(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def build_cube(
    diagram: PlanarDiagram,
    algebra: FrobeniusAlgebra = LAMBDA_ALGEBRA,
    budget: int = DEFAULT_GENERATOR_BUDGET,
) -> CubeComplex:
    n = diagram.n_crossings
    if (1 << n) > budget:
        raise BudgetExceeded(f"2**{n} vertices exceed the generator budget {budget}")
    circles = []
    offsets = []
    total = 0
    for v in range(1 << n):
        cv = circles_at(diagram, v)
        circles.append(cv)
        offsets.append(total)
        total += 1 << len(cv)
        if total > budget:
            raise BudgetExceeded(f"cube has more than {budget} generators")
    npl, nmi = diagram.n_plus, diagram.n_minus
    gens, h, q0 = [], [], []
    for v in range(1 << n):
        p = len(circles[v])
        wt = bin(v).count("1")
        for mask in range(1 << p):
            gens.append((v, mask))
            h.append(-wt + nmi)
            q0.append(p - 2 * bin(mask).count("1") - wt - npl + 2 * nmi)
    d = SparseMatrix(total, total)
    for v in range(1 << n):
        cv = circles[v]
        for i in range(n):
            if not (v >> i) & 1:
                continue
            u = v ^ (1 << i)
            sign = _edge_sign_bits(v, i)
            kind, tv, tu, same = _edge_pattern(cv, circles[u])
            base_v, base_u = offsets[v], offsets[u]
            for mask in range(1 << len(cv)):
                rest = 0
                for j, k in same.items():
                    if (mask >> j) & 1:
                        rest |= 1 << k
                if kind == "merge":
                    a, b = (mask >> tv[0]) & 1, (mask >> tv[1]) & 1
                    for s, lab in algebra.m(a, b):
                        tgt = rest | (lab << tu[0])
                        d.add(base_u + tgt, base_v + mask, s if sign > 0 else -s)
                else:
                    a = (mask >> tv[0]) & 1
                    for s, (l1, l2) in algebra.delta(a):
                        tgt = rest | (l1 << tu[0]) | (l2 << tu[1])
                        d.add(base_u + tgt, base_v + mask, s if sign > 0 else -s)
    return CubeComplex(diagram, algebra, circles, offsets, gens, h, q0, d)


def specialize_lee(c: ChainComplex) -> ChainComplex:
    """Set lambda = 1: the Lee deformation over the rationals."""
    d = SparseMatrix(c.n, c.n, ((r, col, DvrScalar(v.at_one())) for r, col, v in c.d.items()))
    return ChainComplex(c.h, d, None)
