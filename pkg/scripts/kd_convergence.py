"""Two-point connection matrix against the q-loop R-matrix as the truncations grow.

For each (M, N) the deviation max |S(zeta) - R(zeta)| over the critical-circle
grid is printed with and without the asymptotic tail, for both KD sides.
Untailed sums converge like 1/M; tailed ones sit at rounding level.
"""

import argparse
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from merotensor.abelian_rmatrix import build_A_yangian, build_R0_qloop, build_R0_yangian
from merotensor.cartan import GlobalParams
from merotensor.gamma_functor import gamma
from merotensor.qkz_kd import kd_grid, two_point_connection
from merotensor.yangian_rep import ev_sl2


@dataclass
class Config:
    hbar: complex = 0.2 + 0.3j
    a1: complex = 0.1
    a2: complex = 0.45 + 0.2j
    sizes: list[tuple[int, int]] = field(default_factory=lambda: [(25, 50), (50, 100), (100, 200), (200, 400), (400, 800)])
    out: Path | None = None


def sweep(cfg: Config) -> list[dict]:
    P = GlobalParams(hbar=cfg.hbar)
    V1, V2 = ev_sl2(P, cfg.a1), ev_sl2(P, cfg.a2)
    W1, W2 = gamma(V1), gamma(V2)
    A = build_A_yangian(V1, V2)
    grid = kd_grid(P.q, V1.cartan.l, 5, [b / a for a in W1.sigma() for b in W2.sigma()])
    rows = []
    for eps in "+-":
        Rq = build_R0_qloop(W1, W2, eps)
        target = [Rq(z) for z in grid]
        for M, N in cfg.sizes:
            R = build_R0_yangian(V1, V2, eps, N, A=A)
            row = {"eps": eps, "M": M, "N": N}
            for tail in (False, True):
                t0 = time.perf_counter()
                S = two_point_connection(R, M, tail=tail)
                dev = max(float(np.max(np.abs(S.at_zeta(z) - T))) for z, T in zip(grid, target))
                row["tailed" if tail else "untailed"] = dev
                row[("tailed" if tail else "untailed") + "_s"] = time.perf_counter() - t0
            rows.append(row)
            print(f"eps={eps} M={M:4d} N={N:4d}  untailed {row['untailed']:.3e}  tailed {row['tailed']:.3e}", flush=True)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--hbar", type=complex, default=Config.hbar)
    ap.add_argument("--out", type=Path, default=None)
    a = ap.parse_args()
    cfg = Config(hbar=a.hbar, out=a.out)
    rows = sweep(cfg)
    for eps in "+-":
        r = [x for x in rows if x["eps"] == eps]
        ratios = [r[k]["untailed"] / r[k + 1]["untailed"] for k in range(len(r) - 1)]
        print(f"eps={eps}: untailed ratios under doubling {np.round(ratios, 3).tolist()}")
    if cfg.out:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
