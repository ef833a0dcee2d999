"""Chain maps of elementary cobordisms and their composites.

Every move acts on a diagram and induces a chain map between the two cube
complexes.  Maps are built generator by generator from "states": a cube
vertex plus a labeling of its circles (keyed by arc sets).

Crossings created by a move are appended to the crossing list, so the cube
coordinates of the untouched crossings keep their positions and edge signs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import diagram as dg
from .cube import LAMBDA_ALGEBRA, MINUS, PLUS, CubeComplex, build_cube
from .diagram import DiagramError, PlanarDiagram, UNKNOT, circles_at, parse_pd
from .dvr import LAMBDA, ONE, ZERO, DvrScalar, format_scalar
from .homology import HomologyReport, InvariantViolation, SparseMatrix, homology

KINDS = (
    "birth", "death", "saddle", "RI_plus", "RI_minus",
    "RII", "RII_inverse", "RI_minus_inverse",
)
EULER = {"birth": 1, "death": 1, "saddle": -1}
Q_SHIFT = {"birth": 1, "death": 1, "saddle": -1}

ALG = LAMBDA_ALGEBRA


class MoveError(DiagramError):
    """A move that does not apply to the current diagram."""


@dataclass(frozen=True)
class MovieMove:
    kind: str
    location: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MoveError(f"unknown move kind {self.kind!r}")

    @property
    def euler(self) -> int:
        return EULER.get(self.kind, 0)

    @property
    def q_shift(self) -> int:
        return Q_SHIFT.get(self.kind, 0)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.location:
            out["location"] = dict(self.location)
        return out


# -- diagram-level application ------------------------------------------------------

def apply_move(d: PlanarDiagram, move: MovieMove) -> tuple[PlanarDiagram, dict]:
    """Return the new diagram and the surgery data needed by ``chain_map``."""
    loc = move.location
    try:
        if move.kind == "birth":
            out, a = dg.birth(d)
            return out, {"loop": a}
        if move.kind == "death":
            return dg.death(d, loc["loop"]), {"loop": loc["loop"]}
        if move.kind == "saddle":
            a, b = loc["arcs"]
            out = dg.apply_saddle(d, a, b, loc.get("compatibility", "oriented"))
            return out, {"arcs": (a, b)}
        if move.kind == "RI_minus":
            return dg.add_kink(d, loc["loop"], -1)
        if move.kind == "RII":
            return dg.add_finger(d, loc["loop"])
        if move.kind == "RI_plus":
            mid, info1 = dg.add_finger(d, loc["loop"])
            out, info2 = dg.remove_kink(mid, info1["crossings"][0])
            return out, {"mid": mid, "finger": info1, "kink": info2}
        if move.kind == "RI_minus_inverse":
            c = loc["crossing"]
            if not 0 <= c < d.n_crossings or d.signs[c] > 0:
                raise MoveError(f"crossing {c} is not a negative crossing")
            out, info = dg.remove_kink(d, c)
            info["crossing"] = c
            return out, info
        if move.kind == "RII_inverse":
            return _remove_finger(d, tuple(loc.get("crossings", (d.n_crossings - 2, d.n_crossings - 1))))
    except KeyError as exc:
        raise MoveError(f"move {move.kind} is missing location field {exc}") from exc
    except dg.DiagramError as exc:
        raise MoveError(f"{move.kind} does not apply: {exc}") from exc
    raise MoveError(f"unknown move kind {move.kind!r}")


def _remove_finger(d: PlanarDiagram, where: tuple[int, int]) -> tuple[PlanarDiagram, dict]:
    n = d.n_crossings
    if tuple(where) != (n - 2, n - 1):
        raise MoveError("RII_inverse applies to the last two crossings")
    i, j = where
    if d.signs[i] > 0 or d.signs[j] < 0:
        raise MoveError("RII_inverse expects a negative then a positive crossing")
    arcs = set(d.crossings[i]) | set(d.crossings[j])
    for c in range(n - 2):
        if arcs & set(d.crossings[c]):
            raise MoveError("finger crossings must form a separate component")
    loop = min(arcs)
    out = PlanarDiagram(d.crossings[: n - 2], d.loops + (loop,))
    local = PlanarDiagram(d.crossings[n - 2:], ())
    circ = {bits: circles_at(local, bits) for bits in range(4)}
    # bit 0 is the negative crossing, bit 1 the positive one
    if len(circ[2]) != 1 or len(circ[1]) != 3:
        raise MoveError("crossings do not form a Reidemeister II finger")
    s = next(c for c in circ[1] if c in circ[3])
    r = next(c for c in circ[1] if c in circ[0])
    p = next(c for c in circ[1] if c not in (s, r))
    return out, {"loop": loop, "arcs": frozenset(arcs), "s": s, "p": p, "r": r}


# -- chain maps ---------------------------------------------------------------------

def _states(c: CubeComplex):
    for i in range(c.n):
        v, lab = c.state(i)
        yield i, v, lab


def _locate(target_circles, arcs) -> frozenset:
    for circ in target_circles:
        if arcs & circ:
            return circ
    raise KeyError(arcs)


def _emit(F: SparseMatrix, tgt: CubeComplex, col: int, v: int, terms) -> None:
    for coeff, labels in terms:
        if coeff.is_zero:
            continue
        F.add(tgt.index_of_state(v, labels), col, coeff)


def _relabel(labels: dict, target_circles, translate=None) -> dict:
    out = {}
    for circ, lab in labels.items():
        arcs = frozenset(translate.get(a, a) for a in circ) if translate else circ
        out[_locate(target_circles, arcs)] = lab
    return out


def _map_birth(src, tgt, info):
    F = SparseMatrix(tgt.n, src.n)
    new = frozenset((info["loop"],))
    for i, v, lab in _states(src):
        out = dict(lab)
        out[new] = PLUS
        _emit(F, tgt, i, v, [(ONE, out)])
    return F


def _map_death(src, tgt, info):
    F = SparseMatrix(tgt.n, src.n)
    dead = frozenset((info["loop"],))
    for i, v, lab in _states(src):
        c = ALG.counit(lab[dead])
        if c.is_zero:
            continue
        out = {k: x for k, x in lab.items() if k != dead}
        _emit(F, tgt, i, v, [(c, out)])
    return F


def _saddle_pattern(cs, ct, translate, new_loop, self_arc):
    """Which source circles merge/split into which target circles."""
    if self_arc is not None:
        a = next(c for c in cs if self_arc in c)
        b = next(c for c in ct if self_arc in c)
        e = next(c for c in ct if new_loop in c)
        same = {c: _locate(ct, c) for c in cs if c != a}
        return "split", [a], [b, e], same
    special = set(translate) | set(translate.values())
    tcs = [frozenset(translate.get(x, x) for x in c) for c in cs]
    loc = {}
    for k, circ in enumerate(ct):
        for x in circ:
            loc[x] = k
    same, touched_v = {}, []
    used = set()
    for j, circ in enumerate(tcs):
        ks = {loc[x] for x in circ}
        if len(ks) == 1 and ct[next(iter(ks))] == circ and not circ & special:
            k = ks.pop()
            same[cs[j]] = ct[k]
            used.add(k)
        else:
            touched_v.append(cs[j])
    touched_u = [ct[k] for k in range(len(ct)) if k not in used]
    if len(touched_v) == 2 and len(touched_u) == 1:
        return "merge", touched_v, touched_u, same
    if len(touched_v) == 1 and len(touched_u) == 2:
        return "split", touched_v, touched_u, same
    raise InvariantViolation("saddle neither merges nor splits at a vertex")


def _map_saddle(src, tgt, info):
    a, b = info["arcs"]
    ds, dt = src.diagram, tgt.diagram
    translate, new_loop, self_arc = {}, None, None
    if a == b:
        self_arc = a
        new_loop = (set(dt.loops) - set(ds.loops)).pop()
    elif a in ds.loops and b in ds.loops:
        translate = {max(a, b): min(a, b)}
    elif a in ds.loops:
        translate = {a: b}
    elif b in ds.loops:
        translate = {b: a}
    F = SparseMatrix(tgt.n, src.n)
    patterns = {}
    for i, v, lab in _states(src):
        if v not in patterns:
            patterns[v] = _saddle_pattern(src.circles[v], tgt.circles[v], translate, new_loop, self_arc)
        kind, tv, tu, same = patterns[v]
        rest = {same[c]: x for c, x in lab.items() if c in same}
        terms = []
        if kind == "merge":
            for s, l in ALG.m(lab[tv[0]], lab[tv[1]]):
                out = dict(rest)
                out[tu[0]] = l
                terms.append((s, out))
        else:
            for s, (l1, l2) in ALG.delta(lab[tv[0]]):
                out = dict(rest)
                out[tu[0]], out[tu[1]] = l1, l2
                terms.append((s, out))
        _emit(F, tgt, i, v, terms)
    return F


def _map_ri_minus(src, tgt, info):
    """x -> x (x) v- - (x v-) (x) v+ on (big, lobe) at the 1-resolution."""
    n = src.diagram.n_crossings
    big, lobe = frozenset((info["big"],)), frozenset((info["lobe"],))
    F = SparseMatrix(tgt.n, src.n)
    for i, v, lab in _states(src):
        w = v | (1 << n)
        ct = tgt.circles[w]
        rest = _relabel({c: x for c, x in lab.items() if c != big}, ct)
        tb, tl = _locate(ct, big), _locate(ct, lobe)
        x = lab[big]
        terms = []
        out = dict(rest)
        out[tb], out[tl] = x, MINUS
        terms.append((ONE, out))
        for s, l in ALG.m(x, MINUS):
            out = dict(rest)
            out[tb], out[tl] = l, PLUS
            terms.append((-s, out))
        _emit(F, tgt, i, w, terms)
    return F


def _map_rii(src, tgt, info):
    n = src.diagram.n_crossings
    a, b, c, e = info["arcs"]
    loop = frozenset((a,))
    F = SparseMatrix(tgt.n, src.n)
    for i, v, lab in _states(src):
        x = lab[loop]
        rest_src = {k: y for k, y in lab.items() if k != loop}
        # vertex A: negative crossing 0, positive crossing 1
        wa = v | (1 << (n + 1))
        cta = tgt.circles[wa]
        out = _relabel(rest_src, cta)
        out[_locate(cta, frozenset((a,)))] = x
        terms_a = [(ONE, out)]
        # vertex B: negative 1, positive 0; -(Delta x) lifted to (s, r), v+ on p
        wb = v | (1 << n)
        ctb = tgt.circles[wb]
        base = _relabel(rest_src, ctb)
        s_c, p_c, r_c = (_locate(ctb, frozenset((e,))), _locate(ctb, frozenset((a, c))),
                         _locate(ctb, frozenset((b,))))
        terms_b = []
        for coef, (l1, l2) in ALG.delta(x):
            out = dict(base)
            out[s_c], out[r_c], out[p_c] = l1, l2, PLUS
            terms_b.append((-coef, out))
        _emit(F, tgt, i, wa, terms_a)
        _emit(F, tgt, i, wb, terms_b)
    return F


def _map_rii_inverse(src, tgt, info):
    n = src.diagram.n_crossings - 2
    arcs = info["arcs"]
    loop = frozenset((info["loop"],))
    F = SparseMatrix(tgt.n, src.n)
    for i, w, lab in _states(src):
        top = w >> n
        v = w & ((1 << n) - 1)
        if top not in (1, 2):
            continue
        ct = tgt.circles[v]
        rest = _relabel({k: y for k, y in lab.items() if not (k & arcs)}, ct)
        local = {k: y for k, y in lab.items() if k & arcs}
        if top == 2:  # vertex A: one circle, identity
            (y,) = local.values()
            out = dict(rest)
            out[loop] = y
            _emit(F, tgt, i, v, [(ONE, out)])
        else:  # vertex B: m(y_s, y_r) * counit(y_p)
            eps = ALG.counit(local[info["p"]])
            if eps.is_zero:
                continue
            terms = []
            for s, l in ALG.m(local[info["s"]], local[info["r"]]):
                out = dict(rest)
                out[loop] = l
                terms.append((eps * s, out))
            _emit(F, tgt, i, v, terms)
    return F


def _map_ri_minus_inverse(src, tgt, info):
    i0 = info["crossing"]
    lobe = info["lobe"]
    low = (1 << i0) - 1
    translate = {}
    ds = src.diagram
    x = ds.crossings[i0]
    rest_arcs = [a for a in x if a != lobe]
    keep = info["kept"]
    for a in rest_arcs:
        if a != keep:
            translate[a] = keep
    F = SparseMatrix(tgt.n, src.n)
    for i, w, lab in _states(src):
        if not (w >> i0) & 1:
            continue
        lobe_c = next(c for c in lab if lobe in c and len(c) == 1)
        eps = ALG.counit(lab[lobe_c])
        if eps.is_zero:
            continue
        above = w >> (i0 + 1)
        v = (w & low) | (above << i0)
        sign = -1 if bin(above).count("1") % 2 else 1
        ct = tgt.circles[v]
        out = _relabel({c: y for c, y in lab.items() if c != lobe_c}, ct, translate)
        _emit(F, tgt, i, v, [(eps if sign > 0 else -eps, out)])
    return F


_BUILDERS = {
    "birth": _map_birth,
    "death": _map_death,
    "saddle": _map_saddle,
    "RI_minus": _map_ri_minus,
    "RII": _map_rii,
    "RII_inverse": _map_rii_inverse,
    "RI_minus_inverse": _map_ri_minus_inverse,
}


def chain_map(move: MovieMove, source: CubeComplex, target: CubeComplex, info: dict | None = None) -> SparseMatrix:
    """Matrix of the chain map C(source) -> C(target) induced by ``move``."""
    if info is None:
        end, info = apply_move(source.diagram, move)
        if end != target.diagram:
            raise MoveError("target cube does not match the moved diagram")
    if move.kind == "RI_plus":
        mid = build_cube(info["mid"])
        f1 = _map_rii(source, mid, info["finger"])
        kinfo = dict(info["kink"])
        kinfo["crossing"] = info["finger"]["crossings"][0]
        f2 = _map_ri_minus_inverse(mid, target, kinfo)
        return f2 @ f1
    return _BUILDERS[move.kind](source, target, info)


def is_chain_map(F: SparseMatrix, source: CubeComplex, target: CubeComplex) -> bool:
    return target.d @ F == F @ source.d


def map_degrees(F: SparseMatrix, source: CubeComplex, target: CubeComplex) -> tuple[set, set, set]:
    """Observed (h-shift, q-shift, gr-shift mod 4) over nonzero entries."""
    hs, qs, grs = set(), set(), set()
    for r, c, v in F.items():
        hs.add(target.h[r] - source.h[c])
        qs.add(target.q0[r] - 2 * v.valuation - source.q0[c])
        grs.add((target.gr(r) - source.gr(c)) % 4)
    return hs, qs, grs


# -- movies ---------------------------------------------------------------------------

def link_components(d: PlanarDiagram) -> list[frozenset]:
    """Arc sets of the link components."""
    out = [frozenset((a,)) for a in d.loops]
    seen = set()
    for c, x in enumerate(d.crossings):
        for s in (0, 2):
            arc = x[s]
            if arc in seen:
                continue
            comp = set()
            head = d.head(arc)
            while arc not in comp:
                comp.add(arc)
                c2, s2 = head
                arc = d.crossings[c2][s2 ^ 2]
                head = d.head(arc)
            seen |= comp
            out.append(frozenset(comp))
    return sorted(out, key=min)


@dataclass
class MovieStep:
    move: MovieMove
    before: PlanarDiagram
    after: PlanarDiagram
    info: dict


@dataclass
class Movie:
    start: PlanarDiagram
    moves: list[MovieMove]
    name: str = ""

    def steps(self) -> list[MovieStep]:
        d = self.start
        out = []
        for mv in self.moves:
            nd, info = apply_move(d, mv)
            out.append(MovieStep(mv, d, nd, info))
            d = nd
        return out

    @property
    def end(self) -> PlanarDiagram:
        steps = self.steps()
        return steps[-1].after if steps else self.start

    @property
    def euler_characteristic(self) -> int:
        return sum(mv.euler for mv in self.moves)

    def surface_pieces(self) -> tuple[int, int]:
        """(number of connected pieces, number of boundary circles)."""
        d = self.start
        comps = link_components(d)
        parent: dict[int, int] = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        node_of = {}
        for k, comp in enumerate(comps):
            parent[k] = k
            node_of[comp] = k
        counter = len(comps)
        for step in self.steps():
            if step.move.kind == "saddle":
                # the band joins the pieces carrying its two arcs
                a, b = step.info["arcs"]
                na = next(node_of[o] for o in node_of if a in o)
                nb = next(node_of[o] for o in node_of if b in o)
                ra, rb = find(na), find(nb)
                parent[rb] = ra
            new = link_components(step.after)
            new_nodes = {}
            for comp in new:
                olds = {node_of[o] for o in node_of if o & comp}
                if step.move.kind == "birth" and comp == frozenset((step.info["loop"],)):
                    parent[counter] = counter
                    olds = {counter}
                    counter += 1
                if not olds and step.move.kind == "saddle":
                    # a loop pinched off by a self-band stays on the same piece
                    arc = step.info["arcs"][0]
                    olds = {node_of[o] for o in node_of if arc in o}
                if not olds:
                    raise InvariantViolation("lost track of a link component")
                it = iter(olds)
                first = next(it)
                for o in it:
                    ra, rb = find(first), find(o)
                    parent[rb] = ra
                new_nodes[comp] = first
            node_of = new_nodes
        pieces = len({find(k) for k in parent})
        boundary = len(comps) + len(link_components(self.end))
        return pieces, boundary

    @property
    def genus(self) -> int:
        pieces, boundary = self.surface_pieces()
        twice = 2 * pieces - self.euler_characteristic - boundary
        if twice < 0 or twice % 2:
            raise InvariantViolation("movie does not describe an orientable surface")
        return twice // 2

    @property
    def connected(self) -> bool:
        return self.surface_pieces()[0] == 1

    orientable = True  # every band is checked to be oriented

    def to_json(self) -> dict:
        out = {"start": self.start.to_pd(), "moves": [m.to_json() for m in self.moves]}
        if self.name:
            out["name"] = self.name
        return out


def movie_from_json(data) -> Movie:
    if isinstance(data, str):
        data = json.loads(data)
    moves = [MovieMove(m["kind"], dict(m.get("location", {}))) for m in data["moves"]]
    return Movie(parse_pd(data.get("start", "PD[Loop[1]]")), moves, data.get("name", ""))


def load_movie(path) -> Movie:
    return movie_from_json(Path(path).read_text(encoding="utf-8"))


def builtin_movies() -> dict[str, Movie]:
    data = json.loads((Path(__file__).with_name("data") / "movies.json").read_text(encoding="utf-8"))
    return {m["name"]: movie_from_json(m) for m in data["movies"]}


@dataclass
class ComposedMovie:
    movie: Movie
    matrix: SparseMatrix
    start_cube: CubeComplex
    end_cube: CubeComplex
    genus: int
    euler: int


def compose_movie(movie: Movie, check: bool = True) -> ComposedMovie:
    """Composite chain map start -> end; each step is checked to be a chain
    map of the right degrees when ``check`` is set."""
    cube = build_cube(movie.start)
    start = cube
    total = SparseMatrix.identity(cube.n)
    for step in movie.steps():
        nxt = build_cube(step.after)
        F = chain_map(step.move, cube, nxt, step.info)
        if check:
            if not is_chain_map(F, cube, nxt):
                raise InvariantViolation(f"{step.move.kind} map does not commute with d")
            hs, qs, _ = map_degrees(F, cube, nxt)
            if hs - {0} or qs - {step.move.q_shift}:
                raise InvariantViolation(
                    f"{step.move.kind} map has degrees h {sorted(hs)}, q {sorted(qs)}")
        total = F @ total
        cube = nxt
    return ComposedMovie(movie, total, start, cube, movie.genus, movie.euler_characteristic)


# -- sigma pair -------------------------------------------------------------------------

@dataclass
class SigmaPair:
    sigma_plus: DvrScalar
    sigma_minus: DvrScalar
    m_plus: int
    m_minus: int
    genus: int
    gr_shift: int

    @property
    def m(self):
        from fractions import Fraction
        return Fraction(self.m_plus + self.m_minus, 2)

    def to_json(self) -> dict:
        return {
            "sigma_plus": format_scalar(self.sigma_plus),
            "sigma_minus": format_scalar(self.sigma_minus),
            "m_plus": self.m_plus,
            "m_minus": self.m_minus,
            "m": str(self.m),
            "genus": self.genus,
            "gr_shift_mod4": self.gr_shift,
        }


def knot_generators(report: HomologyReport):
    """Free generators (z+, z-) at h = 0, picked out by gr = 1 and gr = -1 mod 4."""
    free = report.free_generators
    if len(free) != 2:
        raise InvariantViolation(f"free rank {len(free)} != 2; not a knot")
    by_gr = {fg.gr: fg for fg in free}
    if set(by_gr) != {1, 3} or any(fg.h != 0 for fg in free):
        raise InvariantViolation("free generators are not in h = 0 with gr = 1 and -1")
    return by_gr[1], by_gr[3]


def sigma_pair(movie: Movie, composed: ComposedMovie | None = None) -> SigmaPair:
    """Images of v+ and v- as multiples of the free generators of the end."""
    start = movie.start
    if start.n_crossings or len(start.loops) != 1:
        raise MoveError("sigma_pair needs a movie starting at the crossingless unknot")
    comp = composed or compose_movie(movie)
    if len(link_components(comp.end_cube.diagram)) != 1:
        raise MoveError("movie does not end at a knot")
    if not movie.connected:
        raise MoveError("the cobordism is not connected")
    report = homology(comp.end_cube)
    zp, zm = knot_generators(report)
    order = [i for i, fg in enumerate(report.free_generators) if fg is zp] + \
            [i for i, fg in enumerate(report.free_generators) if fg is zm]
    odd = comp.genus % 2 == 1
    sig = []
    for label in (PLUS, MINUS):
        col = comp.matrix.column(comp.start_cube.index(0, label))
        coords = report.free_coordinates(col, 0) if col else [ZERO, ZERO]
        zc = [coords[order[0]], coords[order[1]]]
        want, other = (1, 0) if (label == PLUS) == odd else (0, 1)
        if not zc[other].is_zero:
            raise InvariantViolation("image is not a multiple of a single free generator")
        sig.append(zc[want])
    grs = set(map_degrees(comp.matrix, comp.start_cube, comp.end_cube)[2])
    if len(grs) > 1:
        raise InvariantViolation("composite map is not gr-homogeneous")
    shift = grs.pop() if grs else (2 if odd else 0)
    return SigmaPair(sig[0], sig[1], sig[0].valuation, sig[1].valuation, comp.genus, shift)


# -- TQFT coefficient checks ---------------------------------------------------------------

@dataclass(frozen=True)
class GenusOneRelation:
    p: DvrScalar
    q: DvrScalar

    @property
    def product(self) -> DvrScalar:
        return self.p * self.q


def torus_tube_matrix() -> list[list[DvrScalar]]:
    """phi = m o Delta on V in the basis (v+, v-): columns are images."""
    out = [[ZERO, ZERO], [ZERO, ZERO]]
    for a in (PLUS, MINUS):
        for s1, (l1, l2) in ALG.delta(a):
            for s2, l in ALG.m(l1, l2):
                out[l][a] = out[l][a] + s1 * s2
    return out


def verify_pair_of_pants_coefficients() -> dict:
    """Recover a, b, d from capping Delta with deaths and c from phi.

    With Delta(v+) = a v+v- + b v-v+ and Delta(v-) = d v-v- + c v+v+,
    capping the second (first) output with the death gives a (b) on v+
    and d on v-.  The torus tube then reads phi(v-) = 2c v+.
    """
    def capped(label, factor):
        res = {}
        for s, pair in ALG.delta(label):
            eps = ALG.counit(pair[factor])
            if eps.is_zero:
                continue
            keep = pair[1 - factor]
            res[keep] = res.get(keep, ZERO) + s * eps
        return res

    a = capped(PLUS, 1).get(PLUS, ZERO)
    b = capped(PLUS, 0).get(PLUS, ZERO)
    d = capped(MINUS, 1).get(MINUS, ZERO)
    d_alt = capped(MINUS, 0).get(MINUS, ZERO)
    phi = torus_tube_matrix()
    q = phi[MINUS][PLUS]  # sigma_+ after the tube picks up q
    p = phi[PLUS][MINUS]
    c = p / 2
    rel = GenusOneRelation(p, q)
    report = {
        "a": a, "b": b, "d": d, "c": c,
        "phi": phi, "p": p, "q": q, "pq": rel.product,
    }
    ok = (a == ONE and b == ONE and d == ONE and d_alt == ONE and c == LAMBDA**2
          and q == DvrScalar(2) and rel.product == 4 * LAMBDA**2)
    report["ok"] = ok
    if not ok:
        raise InvariantViolation(f"Frobenius coefficients drifted: {report}")
    return report


def torus_tube_movie(start: PlanarDiagram = UNKNOT, loop: int | None = None) -> Movie:
    """Split a loop off an arc and merge it back: a genus-one tube."""
    arc = loop if loop is not None else min(start.arcs())
    fresh = start.fresh_arc()
    return Movie(start, [
        MovieMove("saddle", {"arcs": [arc, arc]}),
        MovieMove("saddle", {"arcs": [arc, fresh]}),
    ], "torus_tube")


def with_torus_tube(movie: Movie) -> Movie:
    """Append a split-then-merge tube at the end of a movie."""
    end = movie.end
    arc = min(end.arcs())
    fresh = end.fresh_arc()
    return Movie(movie.start, list(movie.moves) + [
        MovieMove("saddle", {"arcs": [arc, arc]}),
        MovieMove("saddle", {"arcs": [arc, fresh]}),
    ], (movie.name + "+tube") if movie.name else "")
