"""Exact homology over the DVR Q[lambda]_(lambda).

Pipeline: unit-pivot Gaussian elimination (``pre_reduce``) shrinks the
complex while keeping chain maps to and from the original, then a Smith
reduction per homological degree splits each homology group into a free
part and lambda-torsion.  Chains are plain dicts ``{generator: DvrScalar}``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable

from .dvr import INF, ONE, ZERO, DvrScalar, format_scalar

Chain = dict


class InvariantViolation(AssertionError):
    """A structural invariant (d^2 = 0, homogeneity, ...) failed."""


# -- sparse matrices ------------------------------------------------------------

class SparseMatrix:
    """Column-major sparse matrix with no stored zeros."""

    __slots__ = ("rows", "cols", "_cols")

    def __init__(self, rows: int, cols: int, entries: Iterable = ()):
        self.rows = rows
        self.cols = cols
        self._cols: dict[int, dict[int, DvrScalar]] = {}
        for r, c, v in entries:
            self.add(r, c, v)

    @classmethod
    def from_dense(cls, data) -> "SparseMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        out = cls(rows, cols)
        for r, row in enumerate(data):
            for c, v in enumerate(row):
                out.add(r, c, v)
        return out

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, ((i, i, ONE) for i in range(n)))

    def _check(self, r, c):
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError((r, c))

    def get(self, r: int, c: int) -> DvrScalar:
        return self._cols.get(c, {}).get(r, ZERO)

    def set(self, r: int, c: int, v) -> None:
        self._check(r, c)
        v = DvrScalar(v)
        col = self._cols.setdefault(c, {})
        if v.is_zero:
            col.pop(r, None)
            if not col:
                del self._cols[c]
        else:
            col[r] = v

    def add(self, r: int, c: int, v) -> None:
        self._check(r, c)
        v = DvrScalar(v)
        if v.is_zero:
            return
        col = self._cols.setdefault(c, {})
        s = col.get(r)
        s = v if s is None else s + v
        if s.is_zero:
            del col[r]
            if not col:
                del self._cols[c]
        else:
            col[r] = s

    def column(self, c: int) -> dict[int, DvrScalar]:
        return dict(self._cols.get(c, {}))

    def items(self):
        """Sorted (row, col, value) triples."""
        out = [(r, c, v) for c, col in self._cols.items() for r, v in col.items()]
        out.sort(key=lambda t: (t[0], t[1]))
        return out

    @property
    def nnz(self) -> int:
        return sum(len(col) for col in self._cols.values())

    def is_zero(self) -> bool:
        return not self._cols

    def to_dense(self) -> list[list[DvrScalar]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for c, col in self._cols.items():
            for r, v in col.items():
                out[r][c] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, ((c, r, v) for r, c, v in self.items()))

    def apply(self, vec: Chain) -> Chain:
        out: Chain = {}
        for c, x in vec.items():
            for r, v in self._cols.get(c, {}).items():
                _acc(out, r, v * x)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = SparseMatrix(self.rows, other.cols)
        for c, col in other._cols.items():
            res = self.apply(col)
            if res:
                out._cols[c] = res
        return out

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        out = self.copy()
        for r, c, v in other.items():
            out.add(r, c, v)
        return out

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        out = self.copy()
        for r, c, v in other.items():
            out.add(r, c, -v)
        return out

    def scale(self, s) -> "SparseMatrix":
        s = DvrScalar(s)
        return SparseMatrix(self.rows, self.cols, ((r, c, v * s) for r, c, v in self.items()))

    def copy(self) -> "SparseMatrix":
        out = SparseMatrix(self.rows, self.cols)
        out._cols = {c: dict(col) for c, col in self._cols.items()}
        return out

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self._cols == other._cols

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[r, c, format_scalar(v)] for r, c, v in self.items()],
        }


def _acc(chain: Chain, key, val: DvrScalar) -> None:
    s = chain.get(key)
    s = val if s is None else s + val
    if s.is_zero:
        chain.pop(key, None)
    else:
        chain[key] = s


def chain_add(a: Chain, b: Chain, scale=ONE) -> Chain:
    out = dict(a)
    for k, v in b.items():
        _acc(out, k, v * scale)
    return out


def chain_scale(a: Chain, s) -> Chain:
    s = DvrScalar(s)
    if s.is_zero:
        return {}
    return {k: v * s for k, v in a.items()}


def chain_valuation(a: Chain):
    """Largest power of lambda dividing every coefficient."""
    return min((v.valuation for v in a.values()), default=INF)


# -- chain complexes --------------------------------------------------------------

class ChainComplex:
    """Free complex over the DVR with cohomological differential (raises h by 1).

    ``q0`` is the quantum grading of each generator with lambda weighted 0;
    a coefficient lambda^k lowers q by 2k.  Complexes without a quantum
    grading (filtered emulation) pass ``q0=None``.

    With ``period=2`` homology is taken with respect to h mod 2, for
    differentials that raise h by odd amounts.
    """

    def __init__(self, h: list[int], d: SparseMatrix, q0: list[int] | None = None,
                 period: int | None = None):
        if d.rows != len(h) or d.cols != len(h):
            raise ValueError("differential shape does not match generator count")
        self.h = list(h)
        self.q0 = None if q0 is None else list(q0)
        self.d = d
        self.period = period

    def deg(self, i: int) -> int:
        return self.h[i] if self.period is None else self.h[i] % self.period

    def next_deg(self, k: int, step: int = 1) -> int:
        return k + step if self.period is None else (k + step) % self.period

    @property
    def n(self) -> int:
        return len(self.h)

    def gr(self, i: int) -> int:
        return self.q0[i] - self.h[i]

    def differential(self, chain: Chain) -> Chain:
        return self.d.apply(chain)

    def degrees(self) -> list[int]:
        return sorted({self.deg(i) for i in range(self.n)})

    def generators_at(self, h: int) -> list[int]:
        return [i for i in range(self.n) if self.deg(i) == h]

    def chain_q(self, chain: Chain) -> int | None:
        """Quantum degree of a homogeneous chain (None for the zero chain)."""
        if self.q0 is None:
            raise ValueError("complex carries no quantum grading")
        qs = set()
        for g, c in chain.items():
            if not c.is_monomial:
                raise InvariantViolation(f"non-monomial coefficient {c} in graded chain")
            qs.add(self.q0[g] - 2 * c.valuation)
        if len(qs) > 1:
            raise InvariantViolation(f"chain is not q-homogeneous: degrees {sorted(qs)}")
        return qs.pop() if qs else None

    def chain_gr(self, chain: Chain) -> int | None:
        """gr of a chain, mod 4 (lambda weighted 0)."""
        grs = {self.gr(g) % 4 for g in chain}
        if len(grs) > 1:
            raise InvariantViolation("chain is not gr-homogeneous mod 4")
        return grs.pop() if grs else None

    def chain_h(self, chain: Chain) -> int | None:
        hs = {self.deg(g) for g in chain}
        if len(hs) > 1:
            raise InvariantViolation("chain is not h-homogeneous")
        return hs.pop() if hs else None

    def check_d_squared(self) -> bool:
        return (self.d @ self.d).is_zero()

    def check_gradings(self) -> None:
        """d raises h by 1, preserves q and lowers gr by 1 (mod 4)."""
        for r, c, v in self.d.items():
            if self.h[r] != self.h[c] + 1:
                raise InvariantViolation(f"entry ({r},{c}) does not raise h by 1")
            if self.q0 is not None:
                if not v.is_monomial or self.q0[r] - 2 * v.valuation != self.q0[c]:
                    raise InvariantViolation(f"entry ({r},{c}) = {v} does not preserve q")
                if (self.gr(r) - self.gr(c)) % 4 != 3:
                    raise InvariantViolation(f"entry ({r},{c}) has gr-degree != -1 mod 4")

    def block(self, h: int) -> tuple[list[int], list[int], list[list[DvrScalar]]]:
        """Dense matrix of d: C^h -> C^{h+1} with its row/column generator lists."""
        src = self.generators_at(h)
        tgt = self.generators_at(self.next_deg(h))
        pos = {g: i for i, g in enumerate(tgt)}
        mat = [[ZERO] * len(src) for _ in tgt]
        for j, g in enumerate(src):
            for r, v in self.d._cols.get(g, {}).items():
                mat[pos[r]][j] = v
        return src, tgt, mat

    def to_json(self) -> dict:
        gens = []
        for i in range(self.n):
            rec = {"index": i, "h": self.h[i]}
            if self.q0 is not None:
                rec["q"] = self.q0[i]
                rec["gr"] = self.gr(i)
            gens.append(rec)
        return {"generators": gens, "differential": self.d.to_json()["entries"]}


# -- Gaussian elimination ---------------------------------------------------------

@dataclass
class Reduction:
    """Result of ``pre_reduce``: a smaller homotopy-equivalent complex.

    ``survivors[i]`` is the original index of reduced generator ``i``.
    ``project`` and ``include`` are the chain homotopy equivalences.
    """

    original: ChainComplex
    reduced: ChainComplex
    survivors: list[int]
    log: list = field(repr=False)

    def project(self, chain: Chain) -> Chain:
        """Original chain -> reduced chain (reduced indices)."""
        c = dict(chain)
        for a, b, uinv, _alpha, beta in self.log:
            ca = c.pop(a, None)
            c.pop(b, None)
            if ca is not None:
                f = -(ca * uinv)
                for y, yb in beta.items():
                    _acc(c, y, yb * f)
        pos = {g: i for i, g in enumerate(self.survivors)}
        return {pos[g]: v for g, v in c.items()}

    def include(self, chain: Chain) -> Chain:
        """Reduced chain -> original chain."""
        c = {self.survivors[i]: v for i, v in chain.items()}
        for a, b, uinv, alpha, _beta in reversed(self.log):
            s = ZERO
            for x, ax in alpha.items():
                cx = c.get(x)
                if cx is not None:
                    s = s + cx * ax
            if not s.is_zero:
                _acc(c, b, -(s * uinv))
        return c


def pre_reduce(c: ChainComplex) -> Reduction:
    """Cancel unit differential entries until none remain."""
    cols: dict[int, dict[int, DvrScalar]] = {g: {} for g in range(c.n)}
    rows: dict[int, dict[int, DvrScalar]] = {g: {} for g in range(c.n)}
    for r, col_, v in c.d.items():
        cols[col_][r] = v
        rows[r][col_] = v
    alive = set(range(c.n))
    log = []
    work = list(range(c.n - 1, -1, -1))
    queued = set(work)
    while work:
        b = work.pop()
        queued.discard(b)
        if b not in alive:
            continue
        best = None
        for a, v in cols[b].items():
            if v.valuation == 0:
                cost = len(rows[a])
                if best is None or cost < best[0] or (cost == best[0] and a < best[1]):
                    best = (cost, a)
        if best is None:
            continue
        a = best[1]
        u = cols[b][a]
        uinv = u.invert()
        alpha = {x: v for x, v in rows[a].items() if x != b}
        beta = {y: v for y, v in cols[b].items() if y != a}
        log.append((a, b, uinv, alpha, beta))
        for g in (a, b):
            for y in cols[g]:
                if y not in (a, b):
                    del rows[y][g]
            for x in rows[g]:
                if x not in (a, b):
                    del cols[x][g]
            del cols[g], rows[g]
            alive.discard(g)
        for x, ax in alpha.items():
            f = -(ax * uinv)
            colx = cols[x]
            for y, yb in beta.items():
                val = yb * f
                s = colx.get(y)
                s = val if s is None else s + val
                if s.is_zero:
                    colx.pop(y, None)
                    rows[y].pop(x, None)
                else:
                    colx[y] = s
                    rows[y][x] = s
            if x not in queued:
                work.append(x)
                queued.add(x)
    survivors = sorted(alive)
    pos = {g: i for i, g in enumerate(survivors)}
    d = SparseMatrix(len(survivors), len(survivors))
    for g in survivors:
        for r, v in cols[g].items():
            d.set(pos[r], pos[g], v)
    q0 = None if c.q0 is None else [c.q0[g] for g in survivors]
    reduced = ChainComplex([c.h[g] for g in survivors], d, q0, c.period)
    return Reduction(c, reduced, survivors, log)


# -- Smith normal form ------------------------------------------------------------------

@dataclass
class SmithForm:
    """``U @ M @ V == diag(diagonal)`` with ``diagonal[i] = lambda^k_i``."""

    U: list[list[DvrScalar]]
    V: list[list[DvrScalar]]
    U_inv: list[list[DvrScalar]]
    V_inv: list[list[DvrScalar]]
    diagonal: list[DvrScalar]

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    @property
    def exponents(self) -> list[int]:
        return [x.valuation for x in self.diagonal]


def _eye(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def smith_reduce(m, ncols: int | None = None) -> SmithForm:
    """Smith form over the DVR; pivots on minimal valuation, then least fill-in.

    ``ncols`` is only needed for dense input with zero rows.
    """
    if isinstance(m, SparseMatrix):
        A, rows, cols = m.to_dense(), m.rows, m.cols
    else:
        A = [list(r) for r in m]
        rows = len(A)
        cols = len(A[0]) if rows else (ncols or 0)
    U, U_inv, V, V_inv = _eye(rows), _eye(rows), _eye(cols), _eye(cols)
    diag = []
    r = 0
    while r < min(rows, cols):
        best = None
        row_nz = [sum(1 for j in range(r, cols) if not A[i][j].is_zero) for i in range(rows)]
        col_nz = [sum(1 for i in range(r, rows) if not A[i][j].is_zero) for j in range(cols)]
        for i in range(r, rows):
            for j in range(r, cols):
                x = A[i][j]
                if x.is_zero:
                    continue
                key = (x.valuation, (row_nz[i] - 1) * (col_nz[j] - 1), i, j)
                if best is None or key < best:
                    best = key
        if best is None:
            break
        _, _, i, j = best
        if i != r:
            A[i], A[r] = A[r], A[i]
            U[i], U[r] = U[r], U[i]
            for row in U_inv:
                row[i], row[r] = row[r], row[i]
        if j != r:
            for row in A:
                row[j], row[r] = row[r], row[j]
            for row in V:
                row[j], row[r] = row[r], row[j]
            V_inv[j], V_inv[r] = V_inv[r], V_inv[j]
        p = A[r][r]
        unit = p.unit_part()
        if unit != ONE:
            s = unit.invert()
            A[r] = [x * s for x in A[r]]
            U[r] = [x * s for x in U[r]]
            for row in U_inv:
                row[r] = row[r] * unit
            p = A[r][r]
        for i in range(r + 1, rows):
            if A[i][r].is_zero:
                continue
            f = A[i][r].divide_exact(p)
            A[i] = [x - f * y for x, y in zip(A[i], A[r])]
            U[i] = [x - f * y for x, y in zip(U[i], U[r])]
            for row in U_inv:
                if not row[i].is_zero:
                    row[r] = row[r] + f * row[i]
        for j in range(r + 1, cols):
            if A[r][j].is_zero:
                continue
            f = A[r][j].divide_exact(p)
            for row in A:
                if not row[r].is_zero:
                    row[j] = row[j] - f * row[r]
            for row in V:
                if not row[r].is_zero:
                    row[j] = row[j] - f * row[r]
            V_inv[r] = [x + f * y for x, y in zip(V_inv[r], V_inv[j])]
        diag.append(p)
        r += 1
    return SmithForm(U, V, U_inv, V_inv, diag)


def _matvec(M, v):
    return [sum((a * b for a, b in zip(row, v) if not a.is_zero and not b.is_zero), ZERO) for row in M]


# -- homology ------------------------------------------------------------------------

@dataclass
class FreeGenerator:
    h: int
    chain: Chain
    q: int | None
    gr: int | None  # mod 4

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "q": self.q,
            "gr_mod4": self.gr,
            "chain": [[g, format_scalar(v)] for g, v in sorted(self.chain.items())],
        }


@dataclass
class HomologyGroup:
    h: int
    free_rank: int
    torsion: list[int]
    free_generators: list[FreeGenerator]
    torsion_q: list[int | None] = field(default_factory=list)
    # data for coordinates of cycles
    _src: list[int] = field(default_factory=list, repr=False)
    _vinv_tail: list = field(default_factory=list, repr=False)
    _u2: list = field(default_factory=list, repr=False)
    _rank2: int = 0


@dataclass
class HomologyReport:
    groups: dict[int, HomologyGroup]
    reduction: Reduction = field(repr=False)
    graded: bool = True

    @property
    def free_rank(self) -> int:
        return sum(g.free_rank for g in self.groups.values())

    @property
    def free_generators(self) -> list[FreeGenerator]:
        return [fg for h in sorted(self.groups) for fg in self.groups[h].free_generators]

    @property
    def torsion(self) -> list[int]:
        return sorted(k for g in self.groups.values() for k in g.torsion)

    def free_coordinates(self, chain: Chain, h: int | None = None) -> list[DvrScalar]:
        """Coordinates of the class of a cycle against the free generators at h."""
        red = self.reduction.project(chain)
        if h is None:
            hs = {self.reduction.reduced.deg(g) for g in red}
            if not hs:
                hs = {self.reduction.original.deg(g) for g in chain} or {0}
            if len(hs) != 1:
                raise InvariantViolation("cycle is not h-homogeneous")
            h = hs.pop()
        grp = self.groups.get(h)
        if grp is None:
            return []
        vec = [red.get(g, ZERO) for g in grp._src]
        w = _matvec(grp._vinv_tail, vec)
        y = _matvec(grp._u2, w)
        return y[grp._rank2:]

    def betti_table(self) -> list[dict]:
        """Free rank and torsion per (h, q) bidegree."""
        cells: dict = {}
        for h, g in sorted(self.groups.items()):
            for fg in g.free_generators:
                cells.setdefault((h, fg.q), {"free": 0, "torsion": []})["free"] += 1
            for k, q in zip(g.torsion, g.torsion_q):
                cells.setdefault((h, q), {"free": 0, "torsion": []})["torsion"].append(k)
        out = []
        for (h, q), cell in sorted(cells.items(), key=lambda t: (t[0][0], t[0][1] if t[0][1] is not None else 0)):
            out.append({"h": h, "q": q, "free": cell["free"], "torsion": sorted(cell["torsion"])})
        return out

    def to_json(self) -> dict:
        return {
            "free_rank": self.free_rank,
            "free_generators": [fg.to_json() for fg in self.free_generators],
            "torsion": self.torsion,
            "torsion_annihilator_exponent": torsion_annihilator_exponent(self),
            "by_h": [
                {"h": h, "free_rank": g.free_rank, "torsion": g.torsion}
                for h, g in sorted(self.groups.items())
            ],
            "betti": self.betti_table(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "q", "free", "torsion"])
        for cell in self.betti_table():
            w.writerow([cell["h"], cell["q"], cell["free"], " ".join(map(str, cell["torsion"]))])
        return buf.getvalue()


def homology(c: ChainComplex, reduce: bool = True) -> HomologyReport:
    """Free rank, free generators (as chains of ``c``) and lambda-torsion per h."""
    red = pre_reduce(c) if reduce else Reduction(c, c, list(range(c.n)), [])
    rc = red.reduced
    groups = {}
    hs = set(rc.degrees()) | set(c.degrees())
    for h in sorted(hs):
        src, _tgt, mat = rc.block(h)
        prev_src, _prev_tgt, prev = rc.block(rc.next_deg(h, -1))  # rows of prev are src
        sf = smith_reduce(mat, len(src)) if src else SmithForm([], [], [], [], [])
        r = sf.rank if src else 0
        n = len(src)
        vinv_tail = [row for row in sf.V_inv[r:]] if src else []
        K = [[sf.V[i][j] for j in range(r, n)] for i in range(n)] if src else []
        # boundaries in kernel coordinates
        if prev_src and n:
            kc = [[ZERO] * len(prev_src) for _ in range(n - r)]
            for j in range(len(prev_src)):
                col = [prev[i][j] for i in range(n)]
                w = _matvec(vinv_tail, col)
                for i, x in enumerate(w):
                    kc[i][j] = x
            sf2 = smith_reduce(kc) if n - r else SmithForm(_eye(0), [], _eye(0), [], [])
        else:
            sf2 = SmithForm(_eye(n - r), [], _eye(n - r), [], [])
        rank2 = sf2.rank
        torsion, torsion_q, free = [], [], []
        for j in range(n - r):
            kvec = [row[j] for row in sf2.U_inv]
            vec = _matvec(K, kvec)
            chain_red = {src[i]: x for i, x in enumerate(vec) if not x.is_zero}
            if j < rank2:
                k = sf2.diagonal[j].valuation
                if k > 0:
                    torsion.append(k)
                    if c.q0 is not None:
                        torsion_q.append(rc.chain_q(chain_red))
                    else:
                        torsion_q.append(None)
                continue
            chain = red.include(chain_red)
            q = c.chain_q(chain) if c.q0 is not None else None
            gr = c.chain_gr(chain) if c.q0 is not None else None
            free.append(FreeGenerator(h, chain, q, gr))
        if n == 0 and not torsion:
            continue
        groups[h] = HomologyGroup(
            h, len(free), torsion, free, torsion_q,
            _src=src, _vinv_tail=vinv_tail, _u2=sf2.U, _rank2=rank2,
        )
    return HomologyReport(groups, red, c.q0 is not None)


def solve_linear(A, rhs: list[DvrScalar], ncols: int | None = None) -> list[DvrScalar] | None:
    """A solution x of A x = rhs over the DVR, or None if there is none."""
    sf = smith_reduce(A, ncols)
    cols = len(sf.V)
    y = _matvec(sf.U, rhs)
    x = [ZERO] * cols
    for i, yi in enumerate(y):
        if i < sf.rank:
            if yi.is_zero:
                continue
            if yi.valuation < sf.diagonal[i].valuation:
                return None
            x[i] = yi.divide_exact(sf.diagonal[i])
        elif not yi.is_zero:
            return None
    return _matvec(sf.V, x)


def exactness_power(A, rhs: list[DvrScalar], ncols: int | None = None) -> int | None:
    """Least l with lambda^l rhs in the image of A (None if no power works)."""
    sf = smith_reduce(A, ncols)
    y = _matvec(sf.U, rhs)
    need = 0
    for i, yi in enumerate(y):
        if yi.is_zero:
            continue
        if i >= sf.rank:
            return None
        need = max(need, sf.diagonal[i].valuation - yi.valuation)
    return need


def torsion_annihilator_exponent(r: HomologyReport | Iterable[int]) -> int:
    tors = r.torsion if isinstance(r, HomologyReport) else list(r)
    return max(tors, default=0)


def report_json(r: HomologyReport, **extra) -> str:
    data = dict(extra)
    data.update(r.to_json())
    return json.dumps(data, indent=2, sort_keys=True)
