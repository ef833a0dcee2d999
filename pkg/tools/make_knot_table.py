"""Regenerate src/khlambda/data/knots.json from the KnotInfo database.

Development-time only; needs the ``database_knotinfo`` package.
"""

import json
from pathlib import Path

from database_knotinfo import link_list

NAMES = [
    "3_1", "4_1", "5_1", "5_2", "6_1", "6_2", "6_3", "7_1", "7_2", "7_3",
    "7_4", "7_5", "7_6", "7_7", "8_1", "8_2", "8_5", "8_19", "8_20", "8_21",
    "9_42", "10_124", "10_132", "10_139", "10_145",
]
ALIASES = {"3_1": "T(2,3)", "5_1": "T(2,5)", "7_1": "T(2,7)", "8_19": "T(3,4)", "10_124": "T(3,5)"}


def pd_text(pairs):
    return "PD[" + ", ".join("X[" + ",".join(map(str, x)) + "]" for x in pairs) + "]"


def main():
    by_name = {k["name"]: k for k in link_list()}
    rows = [{"name": "0_1", "pd": "PD[Loop[1]]", "expected_s": 0, "positive": True}]
    for name in NAMES:
        k = by_name[name]
        rec = {
            "name": name,
            "pd": pd_text(json.loads(k["pd_notation"])),
            "expected_s": int(k["rasmussen_invariant"]),
            "positive": k["positive"] == "Y",
        }
        if name in ALIASES:
            rec["alias"] = ALIASES[name]
        rows.append(rec)
    out = Path(__file__).resolve().parents[1] / "src" / "khlambda" / "data" / "knots.json"
    out.write_text(json.dumps({"source": "KnotInfo", "knots": rows}, indent=1) + "\n")


if __name__ == "__main__":
    main()
