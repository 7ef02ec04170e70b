"""Print l and the inverse T-Cartan matrix C(T) for every supported type.

    python3 scripts/tcartan_tables.py [--types E8,F4] [--json out.json]
"""

import argparse
import json
import time
from pathlib import Path

from merotensor.cartan import SUPPORTED_TYPES, build_cartan


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--types", default=None, help="comma-separated labels such as B3,G2")
    ap.add_argument("--json", type=Path, default=None)
    a = ap.parse_args()
    want = set(a.types.split(",")) if a.types else None
    doc = {}
    for t, n in SUPPORTED_TYPES:
        label = f"{t}{n}"
        if want and label not in want:
            continue
        t0 = time.perf_counter()
        cd = build_cartan(t, n)
        dt = time.perf_counter() - t0
        print(f"{label}: l = {cd.l}  ({dt * 1e3:.1f} ms)")
        if want:
            for i, row in enumerate(cd.C):
                print(f"  row {i + 1}: " + " | ".join(str(c) for c in row))
        doc[label] = {"l": cd.l, "C": [[{str(k): v for k, v in c.coeffs.items()} for c in row] for row in cd.C]}
    if a.json:
        a.json.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
