"""Command-line front end.

Exit codes: 0 success, 2 bad input (parse errors, missing files, unknown
knots), 3 generator budget exceeded, 4 invariant violation (an engine bug
or convention drift).  Table and seed jobs fan out over KHLAMBDA_WORKERS
processes and are merged in input order.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .cube import build_cube
from .diagram import (
    DEFAULT_GENERATOR_BUDGET,
    BudgetExceeded,
    DiagramError,
    KnotRecord,
    builtin_table,
    load_table,
    parse_pd,
    table_lookup,
)
from .filtered import WitnessError, perturb_run
from .homology import homology
from .movies import MoveError, builtin_movies, compose_movie, load_movie
from .sinvariant import MIRROR_NOTE, mirror_check, route_b_summary, s_invariant

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4
WORKERS_ENV = "KHLAMBDA_WORKERS"

# perturb-suite: which bundled movie reaches which knot
SUITE_MOVIES = {"unknot": "unknot_identity", "0_1": "unknot_identity",
                "trefoil": "trefoil_seifert", "3_1": "trefoil_seifert"}


class UsageError(Exception):
    pass


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be positive")
    return n


def _fan_out(fn, items: list):
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _pd_text(arg: str) -> str:
    p = Path(arg)
    if p.suffix in (".pd", ".txt", ".json") or p.exists():
        if not p.exists():
            raise UsageError(f"no such file: {arg}")
        return p.read_text(encoding="utf-8")
    return arg


def _records(args) -> list[KnotRecord]:
    if args.table:
        if not Path(args.table).exists():
            raise UsageError(f"no such file: {args.table}")
        return load_table(args.table)
    if args.pd:
        return [KnotRecord(Path(args.pd).stem if Path(args.pd).exists() else "pd", parse_pd(_pd_text(args.pd)))]
    if args.knot:
        try:
            return [KnotRecord(args.knot, table_lookup(args.knot))]
        except KeyError:
            raise UsageError(f"unknown knot {args.knot!r}") from None
    return builtin_table()


def _kh_job(job):
    name, pd, budget = job
    r = homology(build_cube(parse_pd(pd), budget=budget))
    out = {"name": name, "pd": pd}
    out.update(r.to_json())
    return out, r.to_csv()


def _s_job(job):
    name, pd, budget = job
    return s_invariant(parse_pd(pd), budget, name).to_json()


def _mirror_job(job):
    name, pd, budget = job
    out = {"name": name}
    out.update(mirror_check(parse_pd(pd), budget))
    return out


def _jobs(args):
    return [(r.name, r.diagram.to_pd(), args.budget_generators) for r in _records(args)]


def _emit(args, payload, csv_text: str | None = None) -> None:
    if args.format == "csv":
        if csv_text is None:
            raise UsageError(f"{args.command} has no CSV output")
        text = csv_text
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_kh(args):
    results = _fan_out(_kh_job, _jobs(args))
    reports = [r for r, _ in results]
    if len(reports) == 1:
        payload = dict(reports[0], convention=MIRROR_NOTE)
        _emit(args, payload, results[0][1])
        return
    rows = []
    for rep in reports:
        for cell in rep["betti"]:
            rows.append([rep["name"], cell["h"], cell["q"], cell["free"], " ".join(map(str, cell["torsion"]))])
    _emit(args, {"convention": MIRROR_NOTE, "knots": reports},
          _rows_csv(["name", "h", "q", "free", "torsion"], rows))


def cmd_s(args):
    reports = _fan_out(_s_job, _jobs(args))
    csv_text = _rows_csv(["name", "s"], [[r["name"], r["s"]] for r in reports])
    payload = reports[0] if len(reports) == 1 else {"convention": MIRROR_NOTE, "knots": reports}
    _emit(args, payload, csv_text)


def cmd_mirror_check(args):
    reports = _fan_out(_mirror_job, _jobs(args))
    csv_text = _rows_csv(["name", "s", "s_mirror", "ok"],
                         [[r["name"], r["s"], r["s_mirror"], r["ok"]] for r in reports])
    _emit(args, {"convention": MIRROR_NOTE, "knots": reports}, csv_text)


def _movie_from_arg(arg: str):
    movies = builtin_movies()
    if arg in movies:
        return movies[arg]
    if not Path(arg).exists():
        raise UsageError(f"no such movie file or bundled movie: {arg}")
    return load_movie(arg)


def cmd_movie(args):
    if not args.movie:
        raise UsageError("movie needs --movie")
    movie = _movie_from_arg(args.movie)
    payload = route_b_summary(movie, args.budget_generators)
    if not payload["routes_agree"]:
        raise AssertionError(f"movie gives s = {payload['s']}, grading gives {payload['s_from_grading']}")
    keys = sorted(payload)
    csv_text = _rows_csv(keys, [[payload[k] for k in keys]])
    payload["convention"] = MIRROR_NOTE
    _emit(args, payload, csv_text)


def _suite_job(job):
    movie_name, seed = job
    comp = _suite_cache(movie_name)
    return perturb_run(comp[0].start_cube, comp[0].end_cube, comp[0].matrix, seed, comp[1])


_SUITE: dict = {}


def _suite_cache(key):
    if key not in _SUITE:
        movie = builtin_movies()[key] if key in builtin_movies() else load_movie(key)
        comp = compose_movie(movie)
        _SUITE[key] = (comp, homology(comp.end_cube))
    return _SUITE[key]


def cmd_perturb_suite(args):
    if args.seeds < 1:
        raise UsageError("--seeds must be positive")
    if args.movie:
        key = args.movie if args.movie in builtin_movies() else str(Path(args.movie).resolve())
        if key not in builtin_movies() and not Path(key).exists():
            raise UsageError(f"no such movie file or bundled movie: {args.movie}")
    else:
        knot = (args.knot or "trefoil").lower()
        if knot not in SUITE_MOVIES:
            raise UsageError(f"no bundled movie reaches {args.knot!r}; pass --movie")
        key = SUITE_MOVIES[knot]
    seeds = [args.seed + i for i in range(args.seeds)]
    runs = _fan_out(_suite_job, [(key, s) for s in seeds])
    passed = sum(r["ok"] for r in runs)
    payload = {"movie": Path(key).name, "seeds": len(runs), "passed": passed, "runs": runs}
    csv_text = _rows_csv(
        ["seed", "m_plus", "m_sharp_plus", "m_minus", "m_sharp_minus", "ok"],
        [[r["seed"], r["checks"]["plus"]["m_plus"], r["checks"]["plus"]["m_sharp_plus"],
          r["checks"]["minus"]["m_plus"], r["checks"]["minus"]["m_sharp_plus"], r["ok"]] for r in runs])
    _emit(args, payload, csv_text)


COMMANDS = {
    "kh": cmd_kh,
    "s": cmd_s,
    "movie": cmd_movie,
    "mirror-check": cmd_mirror_check,
    "perturb-suite": cmd_perturb_suite,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="khlambda", description="Khovanov homology over Q[lambda] localized at lambda.")
    ap.add_argument("--version", action="version", version=f"khlambda {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, inputs=True):
        if inputs:
            p.add_argument("--pd", help="PD code, or a file holding one")
            p.add_argument("--table", help="knot table (.json or .csv with name,pd columns)")
            p.add_argument("--knot", help="bundled knot by name, torus alias or common name")
        p.add_argument("--budget-generators", type=int, default=DEFAULT_GENERATOR_BUDGET, metavar="N")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    common(sub.add_parser("kh", help="homology report"))
    common(sub.add_parser("s", help="s-invariant from q-degrees"))
    common(sub.add_parser("mirror-check", help="check s(mirror) = -s"))
    p = sub.add_parser("movie", help="evaluate a cobordism movie")
    p.add_argument("--movie", help="movie JSON file or bundled movie name")
    common(p, inputs=False)
    p = sub.add_parser("perturb-suite", help="seeded filtered-perturbation checks")
    p.add_argument("--knot", help="unknot or trefoil (ignored with --movie)")
    p.add_argument("--movie", help="movie JSON file or bundled movie name")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    common(p, inputs=False)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget_generators", 1) < 1:
        parser.error("--budget-generators must be positive")
    try:
        COMMANDS[args.command](args)
    except BudgetExceeded as e:
        print(f"khlambda: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except AssertionError as e:
        print(f"khlambda: invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, DiagramError, MoveError, WitnessError, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"khlambda: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
