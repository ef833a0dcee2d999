"""Search for a Seifert-surface movie U -> positive trefoil.

Two discs (loop A and a born loop B) are joined by three half-twisted
bands.  Each band is a born loop given a positive kink and then banded to
both discs.  Prints the first movie whose end diagram is a 3-crossing
positive knot, as JSON.
"""

import itertools
import json

from khlambda.diagram import DiagramError, UNKNOT
from khlambda.movies import Movie, MovieMove, apply_move, link_components


def extend(d, moves, j):
    if j == 3:
        yield d, moves
        return
    base = list(moves)
    for mv in (MovieMove("birth"),):
        d1, info = apply_move(d, mv)
        loop = info["loop"]
        d2, _ = apply_move(d1, MovieMove("RI_plus", {"loop": loop}))
        kink = d2.crossings[-1]
        lobes = sorted(set(kink))
        old = sorted(d.arcs())
        for l1, l2 in itertools.permutations(lobes):
            for a in old:
                try:
                    m3 = MovieMove("saddle", {"arcs": [l1, a]})
                    d3, _ = apply_move(d2, m3)
                except DiagramError:
                    continue
                for b in sorted(d3.arcs()):
                    if b in (l1, a) or b not in old and b != l2:
                        pass
                    try:
                        m4 = MovieMove("saddle", {"arcs": [l2, b]})
                        d4, _ = apply_move(d3, m4)
                    except DiagramError:
                        continue
                    if l2 == b:
                        continue
                    yield from extend(
                        d4, base + [mv, MovieMove("RI_plus", {"loop": loop}), m3, m4], j + 1)


def main():
    start, _ = apply_move(UNKNOT, MovieMove("birth"))
    for d, moves in extend(start, [MovieMove("birth")], 0):
        if d.loops or d.n_crossings != 3 or d.n_minus:
            continue
        if len(link_components(d)) != 1:
            continue
        movie = Movie(UNKNOT, moves, "trefoil_seifert")
        if movie.genus != 1:
            continue
        print(json.dumps(movie.to_json()))
        print(d.to_pd())
        return


if __name__ == "__main__":
    main()
