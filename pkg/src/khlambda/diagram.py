"""Oriented link diagrams in PD notation and their resolution cube.

A crossing ``X[i, j, k, l]`` lists its four arcs counterclockwise starting
from the incoming under-strand, so the under-strand runs ``i -> k``.  The
0-smoothing joins ``(i, j)`` and ``(k, l)``; the 1-smoothing joins ``(i, l)``
and ``(j, k)``.  For a positive crossing the 0-smoothing is the oriented one.

Crossingless components are carried separately as ``loops`` (one arc id
each), written ``Loop[a]`` in PD text.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_GENERATOR_BUDGET = 2**20

# slot pairs joined by each smoothing
SMOOTHING_PAIRS = {0: ((0, 1), (2, 3)), 1: ((0, 3), (1, 2))}


class DiagramError(ValueError):
    """Malformed or inconsistent diagram data."""


class BandError(DiagramError):
    """A saddle band that cannot be realized as an oriented planar band."""


class BudgetExceeded(RuntimeError):
    """The cube would exceed the configured generator budget."""


class _UnionFind:
    def __init__(self, items: Iterable = ()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self) -> list[frozenset]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in out.values()]


@dataclass(frozen=True)
class Resolution:
    """The unlink obtained by smoothing every crossing according to ``vertex``."""

    vertex: tuple[int, ...]
    circles: tuple[frozenset, ...]

    @property
    def p(self) -> int:
        return len(self.circles)

    def circle_of(self, arc) -> int:
        for idx, circ in enumerate(self.circles):
            if arc in circ:
                return idx
        raise KeyError(arc)


@dataclass(frozen=True)
class PlanarDiagram:
    crossings: tuple[tuple[int, int, int, int], ...]
    loops: tuple[int, ...] = ()
    # derived
    heads: dict = field(init=False, repr=False, compare=False, hash=False)
    signs: tuple[int, ...] = field(init=False, repr=False, compare=False)
    components: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        crossings = tuple(tuple(int(a) for a in x) for x in self.crossings)
        loops = tuple(int(a) for a in self.loops)
        object.__setattr__(self, "crossings", crossings)
        object.__setattr__(self, "loops", loops)
        _check_arcs(crossings, loops)
        heads, comps = _orient(crossings)
        signs = tuple(1 if (c, 3) in heads else -1 for c in range(len(crossings)))
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "components", comps + len(loops))
        if not is_planar(crossings):
            raise DiagramError("crossing data does not describe a planar diagram")

    @property
    def n_crossings(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for s in self.signs if s > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for s in self.signs if s < 0)

    def arcs(self) -> set[int]:
        out = set(self.loops)
        for x in self.crossings:
            out.update(x)
        return out

    def fresh_arc(self) -> int:
        arcs = self.arcs()
        return max(arcs) + 1 if arcs else 1

    def positions(self, arc) -> list[tuple[int, int]]:
        return [(c, s) for c, x in enumerate(self.crossings) for s in range(4) if x[s] == arc]

    def head(self, arc) -> tuple[int, int]:
        """(crossing, slot) where ``arc`` ends."""
        for pos in self.positions(arc):
            if pos in self.heads:
                return pos
        raise KeyError(arc)

    def tail(self, arc) -> tuple[int, int]:
        for pos in self.positions(arc):
            if pos not in self.heads:
                return pos
        raise KeyError(arc)

    def to_pd(self) -> str:
        parts = [f"X[{','.join(map(str, x))}]" for x in self.crossings]
        parts += [f"Loop[{a}]" for a in self.loops]
        return f"PD[{', '.join(parts)}]"

    def __str__(self):
        return self.to_pd()


def _check_arcs(crossings, loops):
    count: dict[int, int] = {}
    for x in crossings:
        if len(x) != 4:
            raise DiagramError(f"crossing {x} does not have four arcs")
        for a in x:
            count[a] = count.get(a, 0) + 1
    for a, n in count.items():
        if n != 2:
            raise DiagramError(f"arc {a} occurs {n} times (expected 2)")
    if len(set(loops)) != len(loops):
        raise DiagramError("duplicate loop ids")
    for a in loops:
        if a in count:
            raise DiagramError(f"loop id {a} is also used by a crossing")


def _orient(crossings) -> tuple[set, int]:
    """Propagate orientations along strands; returns head positions."""
    where: dict[int, list[tuple[int, int]]] = {}
    for c, x in enumerate(crossings):
        for s, a in enumerate(x):
            where.setdefault(a, []).append((c, s))

    def other(arc, pos):
        p, q = where[arc]
        return q if p == pos else p

    heads: set = set()
    seen: set = set()
    comps = 0
    seeds = [(x[0], (c, 0)) for c, x in enumerate(crossings)]
    seeds += [(a, where[a][0]) for a in sorted(where)]
    for arc, head in seeds:
        if arc in seen:
            continue
        comps += 1
        while arc not in seen:
            seen.add(arc)
            tail = other(arc, head)
            if head[1] == 2 or tail[1] == 0:
                raise DiagramError(f"inconsistent orientation at arc {arc}")
            heads.add(head)
            c, s = head
            nxt_tail = (c, s ^ 2)
            arc = crossings[c][s ^ 2]
            head = other(arc, nxt_tail)
        if head not in heads:
            raise DiagramError("strand traversal did not close up consistently")
    return heads, comps


def face_count(crossings) -> int:
    where: dict[int, list[tuple[int, int]]] = {}
    for c, x in enumerate(crossings):
        for s, a in enumerate(x):
            where.setdefault(a, []).append((c, s))

    def step(pos):
        c, s = pos
        p, q = where[crossings[c][s]]
        c2, s2 = q if p == pos else p
        return (c2, (s2 - 1) % 4)

    seen = set()
    faces = 0
    for c in range(len(crossings)):
        for s in range(4):
            if (c, s) in seen:
                continue
            faces += 1
            pos = (c, s)
            while pos not in seen:
                seen.add(pos)
                pos = step(pos)
    return faces


def is_planar(crossings) -> bool:
    """Every connected piece of the 4-valent graph must have genus zero."""
    if not crossings:
        return True
    uf = _UnionFind(range(len(crossings)))
    first: dict[int, int] = {}
    for c, x in enumerate(crossings):
        for a in x:
            if a in first:
                uf.union(first[a], c)
            else:
                first[a] = c
    pieces = len({uf.find(c) for c in range(len(crossings))})
    return face_count(crossings) == len(crossings) + 2 * pieces


# -- parsing ------------------------------------------------------------------

_X = re.compile(r"X\s*\[\s*([^\]]*)\]", re.I)
_LOOP = re.compile(r"Loop\s*\[\s*(-?\d+)\s*\]", re.I)


def parse_pd(text: str) -> PlanarDiagram:
    """Parse ``PD[X[..], ..., Loop[a]]`` or a KnotInfo-style ``[[..],[..]]`` list.

    ``PD[]`` is the empty link; ``PD[Loop[1]]`` the crossingless unknot.
    """
    text = text.strip()
    if not text:
        raise DiagramError("empty PD text")
    crossings = []
    loops = []
    if text.upper().startswith("PD"):
        body = text[2:].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise DiagramError(f"malformed PD text: {text!r}")
        inner = body[1:-1]
        rest = _LOOP.sub("", _X.sub("", inner))
        if rest.replace(",", "").strip():
            raise DiagramError(f"unrecognized content in PD text: {rest.strip()!r}")
        for m in _X.finditer(inner):
            crossings.append(_parse_tuple(m.group(1)))
        loops = [int(m.group(1)) for m in _LOOP.finditer(inner)]
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DiagramError(f"malformed PD text: {text!r}") from exc
        if not isinstance(data, list):
            raise DiagramError("PD list must be a list of 4-tuples")
        for item in data:
            if not isinstance(item, list) or not all(isinstance(a, int) for a in item):
                raise DiagramError(f"malformed crossing {item!r}")
            crossings.append(tuple(item))
        if not crossings:
            loops = [1]
    for x in crossings:
        if len(x) != 4:
            raise DiagramError(f"crossing {x} does not have four arcs")
    return PlanarDiagram(tuple(crossings), tuple(loops))


def _parse_tuple(body: str) -> tuple[int, ...]:
    try:
        return tuple(int(a) for a in body.split(","))
    except ValueError as exc:
        raise DiagramError(f"malformed crossing X[{body}]") from exc


UNKNOT = PlanarDiagram((), (1,))
EMPTY = PlanarDiagram((), ())


# -- resolutions ----------------------------------------------------------------

def as_bits(d: PlanarDiagram, v) -> int:
    if isinstance(v, int):
        if not 0 <= v < (1 << d.n_crossings):
            raise ValueError("vertex out of range")
        return v
    v = tuple(v)
    if len(v) != d.n_crossings or any(b not in (0, 1) for b in v):
        raise ValueError(f"vertex must be a 0/1 vector of length {d.n_crossings}")
    return sum(b << i for i, b in enumerate(v))


def as_tuple(n: int, bits: int) -> tuple[int, ...]:
    return tuple((bits >> i) & 1 for i in range(n))


def circles_at(d: PlanarDiagram, bits: int) -> tuple[frozenset, ...]:
    uf = _UnionFind()
    for x in d.crossings:
        for a in x:
            uf.add(a)
    for i, x in enumerate(d.crossings):
        for s, t in SMOOTHING_PAIRS[(bits >> i) & 1]:
            uf.union(x[s], x[t])
    circles = uf.groups() + [frozenset((a,)) for a in d.loops]
    return tuple(sorted(circles, key=min))


def resolve(d: PlanarDiagram, v) -> Resolution:
    bits = as_bits(d, v)
    return Resolution(as_tuple(d.n_crossings, bits), circles_at(d, bits))


def all_circle_counts(
    d: PlanarDiagram, budget: int = DEFAULT_GENERATOR_BUDGET
) -> dict[tuple[int, ...], int]:
    """Circle count p(v) for every vertex; raises if sum 2**p(v) > budget."""
    n = d.n_crossings
    if (1 << n) > budget:
        raise BudgetExceeded(f"2**{n} vertices exceed the generator budget {budget}")
    out = {}
    total = 0
    for bits in range(1 << n):
        p = len(circles_at(d, bits))
        total += 1 << p
        if total > budget:
            raise BudgetExceeded(f"cube has more than {budget} generators")
        out[as_tuple(n, bits)] = p
    return out


# -- surgery --------------------------------------------------------------------

def mirror(d: PlanarDiagram) -> PlanarDiagram:
    """Switch every crossing."""
    out = []
    for c, (i, j, k, l) in enumerate(d.crossings):
        if d.signs[c] > 0:  # over strand runs l -> j
            out.append((l, i, j, k))
        else:
            out.append((j, k, l, i))
    return PlanarDiagram(tuple(out), d.loops)


def apply_saddle(
    d: PlanarDiagram, arc_a: int, arc_b: int, compatibility: str = "oriented"
) -> PlanarDiagram:
    """Attach an oriented band between ``arc_a`` and ``arc_b``.

    The caller chooses arcs bordering a common region with opposite
    orientations along the band; the result is checked for planarity.
    Banding an arc (or loop) to itself pinches off a new free loop.
    """
    if compatibility != "oriented":
        raise BandError("non-orientable band requested")
    arcs = d.arcs()
    for a in (arc_a, arc_b):
        if a not in arcs:
            raise BandError(f"arc {a} is not in the diagram")
    loops = list(d.loops)
    if arc_a == arc_b:
        return PlanarDiagram(d.crossings, tuple(loops + [d.fresh_arc()]))
    la, lb = arc_a in loops, arc_b in loops
    if la and lb:
        loops.remove(max(arc_a, arc_b))
        return PlanarDiagram(d.crossings, tuple(loops))
    if la or lb:
        loops.remove(arc_a if la else arc_b)
        return PlanarDiagram(d.crossings, tuple(loops))
    ha, hb = d.head(arc_a), d.head(arc_b)
    cross = [list(x) for x in d.crossings]
    cross[ha[0]][ha[1]] = arc_b
    cross[hb[0]][hb[1]] = arc_a
    try:
        return PlanarDiagram(tuple(tuple(x) for x in cross), d.loops)
    except DiagramError as exc:
        raise BandError(f"band between arcs {arc_a} and {arc_b} is not planar") from exc


def add_kink(d: PlanarDiagram, loop: int, sign: int) -> tuple[PlanarDiagram, dict]:
    """Reidemeister I on a crossingless loop; the new crossing is appended."""
    if loop not in d.loops:
        raise DiagramError(f"{loop} is not a crossingless loop")
    r, p = loop, d.fresh_arc()
    x = (r, r, p, p) if sign > 0 else (r, p, p, r)
    loops = tuple(a for a in d.loops if a != loop)
    out = PlanarDiagram(d.crossings + (x,), loops)
    return out, {"crossing": len(d.crossings), "big": r, "lobe": p}


def add_finger(d: PlanarDiagram, loop: int) -> tuple[PlanarDiagram, dict]:
    """Reidemeister II on a crossingless loop (a finger of the loop pushed
    over itself).  Appends a negative then a positive crossing."""
    if loop not in d.loops:
        raise DiagramError(f"{loop} is not a crossingless loop")
    a = loop
    b = d.fresh_arc()
    c, e = b + 1, b + 2
    new = ((e, c, a, e), (a, c, b, b))
    loops = tuple(x for x in d.loops if x != loop)
    out = PlanarDiagram(d.crossings + new, loops)
    n = len(d.crossings)
    return out, {"crossings": (n, n + 1), "arcs": (a, b, c, e)}


def monogon_slots(d: PlanarDiagram, c: int) -> tuple[int, int] | None:
    x = d.crossings[c]
    for s in range(4):
        t = (s + 1) % 4
        if x[s] == x[t]:
            return (s, t) if s < t else (t, s)
    return None


def remove_kink(d: PlanarDiagram, c: int) -> tuple[PlanarDiagram, dict]:
    """Undo a Reidemeister I move at crossing ``c`` (which must carry a monogon)."""
    slots = monogon_slots(d, c)
    if slots is None:
        raise DiagramError(f"crossing {c} is not a kink")
    x = d.crossings[c]
    lobe = x[slots[0]]
    rest = [s for s in range(4) if s not in slots]
    a1, a2 = x[rest[0]], x[rest[1]]
    cross = [list(y) for i, y in enumerate(d.crossings) if i != c]
    loops = list(d.loops)
    if a1 == a2:
        loops.append(a1)
        keep = a1
    else:
        keep, drop = min(a1, a2), max(a1, a2)
        for y in cross:
            for s in range(4):
                if y[s] == drop:
                    y[s] = keep
    out = PlanarDiagram(tuple(tuple(y) for y in cross), tuple(loops))
    # the smoothing that isolates the lobe as its own circle
    isolating = 1 if slots in ((0, 3), (1, 2)) else 0
    return out, {"lobe": lobe, "kept": keep, "isolating": isolating}


def birth(d: PlanarDiagram) -> tuple[PlanarDiagram, int]:
    a = d.fresh_arc()
    return PlanarDiagram(d.crossings, d.loops + (a,)), a


def death(d: PlanarDiagram, loop: int) -> PlanarDiagram:
    if loop not in d.loops:
        raise DiagramError(f"{loop} is not a crossingless loop")
    return PlanarDiagram(d.crossings, tuple(a for a in d.loops if a != loop))


def disjoint_union(d1: PlanarDiagram, d2: PlanarDiagram) -> PlanarDiagram:
    """Split union; arcs of ``d2`` are shifted past those of ``d1``."""
    shift = max(d1.arcs(), default=0)
    cross = d1.crossings + tuple(tuple(a + shift for a in x) for x in d2.crossings)
    return PlanarDiagram(cross, d1.loops + tuple(a + shift for a in d2.loops))


def connected_sum(d1: PlanarDiagram, d2: PlanarDiagram) -> PlanarDiagram:
    """Band-sum of two knot diagrams along their first arcs.

    The two pieces are split, so the band is always planar; this is the
    connected sum of the underlying knots.
    """
    u = disjoint_union(d1, d2)
    a = min(d1.arcs())
    shift = max(d1.arcs(), default=0)
    # pick arc of d2 in the outer region: any arc works after a sphere isotopy
    b = min(d2.arcs()) + shift
    return apply_saddle(u, a, b)


# -- tables -----------------------------------------------------------------------

@dataclass(frozen=True)
class KnotRecord:
    name: str
    diagram: PlanarDiagram
    expected_s: int | None = None
    alias: str | None = None
    positive: bool | None = None


def _record(name, pd, expected_s=None, alias=None, positive=None) -> KnotRecord:
    if isinstance(pd, list):
        pd = json.dumps(pd)
    exp = None if expected_s in (None, "") else int(expected_s)
    return KnotRecord(str(name), parse_pd(pd), exp, alias or None, positive)


def load_table(path: str | Path) -> list[KnotRecord]:
    """Read a JSON (list of {name, pd, expected_s?}) or CSV (name, pd) table."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return read_csv_table(text)
    return read_json_table(text)


def read_json_table(text: str) -> list[KnotRecord]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("knots", [])
    return [
        _record(r["name"], r["pd"], r.get("expected_s"), r.get("alias"), r.get("positive"))
        for r in data
    ]


def read_csv_table(text: str) -> list[KnotRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or not {"name", "pd"} <= set(reader.fieldnames):
        raise DiagramError("CSV table needs 'name' and 'pd' columns")
    return [_record(r["name"], r["pd"], r.get("expected_s")) for r in reader]


def builtin_table() -> list[KnotRecord]:
    """The bundled fixture table (knots up to ten crossings)."""
    path = Path(__file__).with_name("data") / "knots.json"
    return load_table(path)


# everyday names; a leading "-" asks for the mirror of the table entry
COMMON_NAMES = {
    "unknot": "0_1",
    "trefoil": "3_1",
    "right-trefoil": "3_1",
    "left-trefoil": "-3_1",
    "figure-eight": "4_1",
}


def table_lookup(name: str) -> PlanarDiagram:
    """Diagram of a bundled knot by table name, torus alias or common name."""
    key = COMMON_NAMES.get(name.lower(), name)
    flip = key.startswith("-")
    key = key.lstrip("-")
    for rec in builtin_table():
        if key in (rec.name, rec.alias):
            return mirror(rec.diagram) if flip else rec.diagram
    raise KeyError(name)


def vertex_weight(v: Sequence[int]) -> int:
    return sum(v)
