"""Run the acceptance criteria and write a JSON report.

    python3 scripts/run_acceptance.py [--quick] [--only 1,7] [--out results/acceptance.json]
"""

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

from merotensor.acceptance import overall_status, run_acceptance
from merotensor.cartan import GlobalParams


@dataclass
class Config:
    hbar: complex = 0.2 + 0.3j
    quick: bool = False
    only: tuple[int, ...] | None = None
    tol: float | None = None
    out: Path = Path("results/acceptance.json")


def parse() -> Config:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--hbar", type=complex, default=Config.hbar)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--only", default=None)
    ap.add_argument("--tol", type=float, default=None)
    ap.add_argument("--out", type=Path, default=Config.out)
    a = ap.parse_args()
    only = tuple(int(x) for x in a.only.split(",")) if a.only else None
    return Config(a.hbar, a.quick, only, a.tol, a.out)


def main() -> int:
    cfg = parse()
    P = GlobalParams(hbar=cfg.hbar)
    results = run_acceptance(P, quick=cfg.quick, tol=cfg.tol, only=cfg.only, on_result=lambda r: print(r.line(), flush=True))
    status = overall_status(results)
    print(f"overall: {status}")
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    doc = {"params": P.to_json(), "quick": cfg.quick, "status": status, "criteria": [r.to_json() for r in results]}
    cfg.out.write_text(json.dumps(doc, indent=2, default=str) + "\n")
    print(f"wrote {cfg.out}")
    return 0 if status != "fail" else 1


if __name__ == "__main__":
    raise SystemExit(main())
