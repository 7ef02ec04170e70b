"""Command-line front end: ``python3 -m merotensor <command> ...``.

Every JSON document starts with the run configuration, so a result can be
reproduced from its own header.  Exit codes: 0 success, 1 a check failed,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cartan import CartanError, GlobalParams, build_cartan

__all__ = ["RunConfig", "main", "parse_rep_spec", "to_jsonable"]

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    hbar: complex = 0.2 + 0.3j
    tol: float | None = None
    seed: int = 20240531
    trunc_inner: int = 400
    trunc_outer: int = 400
    trunc_m: int = 300
    output_format: str = "json"

    def params(self) -> GlobalParams:
        kw = dict(hbar=self.hbar, seed=self.seed, n_inner=self.trunc_inner, n_outer=self.trunc_outer, m_outer=self.trunc_m)
        if self.tol is not None:
            kw["tol"] = self.tol
        return GlobalParams(**kw)

    def to_json(self) -> dict:
        d = asdict(self)
        d["hbar"] = [self.hbar.real, self.hbar.imag]
        d["version"] = __version__
        return d


def to_jsonable(x):
    """Recursively convert numpy and complex values; complex numbers become [re, im]."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_complex(text: str) -> complex:
    """'re,im' or a Python complex literal such as '0.45+0.2j'."""
    t = text.strip().replace(" ", "")
    if "," in t and "j" not in t:
        parts = t.split(",")
        if len(parts) != 2:
            raise UsageError(f"expected re,im but got {text!r}")
        try:
            return complex(float(parts[0]), float(parts[1]))
        except ValueError as e:
            raise UsageError(f"cannot parse {text!r} as a complex number") from e
    try:
        return complex(t)
    except ValueError as e:
        raise UsageError(f"cannot parse {text!r} as a complex number") from e


def parse_points(text: str) -> list[complex]:
    """Semicolon-separated points; each is 're,im' or a complex literal.  Commas between
    literals (e.g. '0.3+0.1j,0.5j') are also accepted."""
    t = text.strip()
    if ";" in t:
        items = t.split(";")
    elif "j" in t:
        items = t.split(",")
    else:
        items = [t]
    return [parse_complex(s) for s in items if s.strip()]


def _complex_from_json(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return parse_complex(v)
    raise UsageError(f"cannot read {v!r} as a complex number")


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[_complex_from_json(x) for x in row] for row in rows], dtype=complex)


def _load_spec(text: str) -> dict:
    t = text.strip()
    if t.startswith("ev:"):
        return {"builder": "ev_sl2", "a": t[3:]}
    if t.startswith("{"):
        try:
            return json.loads(t)
        except json.JSONDecodeError as e:
            raise UsageError(f"invalid inline JSON spec: {e}") from e
    p = Path(t)
    if not p.exists():
        raise UsageError(f"rep spec {text!r} is neither 'ev:<a>', inline JSON, nor an existing file")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise UsageError(f"invalid JSON in {p}: {e}") from e


def parse_rep_spec(spec, P: GlobalParams):
    """Build a Yangian representation from a spec string or an already-decoded dict.

    Builders: ``ev_sl2`` (key ``a``), ``from_low_modes`` (keys ``cartan``,
    ``xi0``, ``t1``, ``xp0``, ``xm0``) and ``tensor`` (keys ``left``,
    ``right``, ``s``).
    """
    from .drinfeld_tensor import ytensor
    from .yangian_rep import InvalidRepresentationError, ev_sl2, from_low_modes

    d = _load_spec(spec) if isinstance(spec, str) else spec
    b = d.get("builder")
    if b == "ev_sl2":
        return ev_sl2(P, _complex_from_json(d["a"]))
    if b == "tensor":
        return ytensor(parse_rep_spec(d["left"], P), parse_rep_spec(d["right"], P), _complex_from_json(d.get("s", 0.0)))
    if b == "from_low_modes":
        t, n = d["cartan"]
        cd = build_cartan(t, int(n))
        data = {k: [_matrix_from_json(m) for m in d[k]] for k in ("xi0", "t1", "xp0", "xm0")}
        try:
            return from_low_modes(cd, P, data)
        except InvalidRepresentationError as e:
            raise UsageError(f"supplied matrices do not define a representation: {e}") from e
    raise UsageError(f"unknown builder {b!r}")


# ---------------------------------------------------------------------------
# commands; each returns (result dict, ok flag)


def cmd_qcartan(args, cfg: RunConfig):
    cd = build_cartan(args.type, args.rank)
    C = [[{str(k): v for k, v in cd.C[i][j].coeffs.items()} for j in range(cd.rank)] for i in range(cd.rank)]
    return {
        "type": cd.type,
        "rank": cd.rank,
        "l": cd.l,
        "symmetrizer": list(cd.d),
        "cartan_matrix": cd.A.tolist(),
        "C": C,
        "identity": "B(T) C(T) = [l]_T Id verified exactly",
    }, True


def _relations_block(rep, limit):
    return {"residuals": rep.residuals, "worst": rep.worst, "limit": limit, "n_samples": rep.n_samples, "passed": rep.worst < limit}


def cmd_rep(args, cfg: RunConfig):
    from .yangian_rep import is_noncongruent, verify_relations

    P = cfg.params()
    V = parse_rep_spec(args.rep, P)
    rel = verify_relations(V, n_samples=args.samples)
    lim = P.tol
    nc, wit = is_noncongruent(V)
    out = {"rep": V.to_json(), "relations": _relations_block(rel, lim), "sigma": V.sigma(), "noncongruent": nc, "witness": wit}
    return out, rel.worst < lim


def cmd_tensor(args, cfg: RunConfig):
    from .drinfeld_tensor import qtensor, ytensor
    from .gamma_functor import gamma, verify_qrelations
    from .yangian_rep import verify_relations

    P = cfg.params()
    V1, V2 = parse_rep_spec(args.left, P), parse_rep_spec(args.right, P)
    par = parse_complex(args.param)
    if args.alg == "yangian":
        T = ytensor(V1, V2, par)
        rel = verify_relations(T, n_samples=args.samples)
        lim = P.tol
    else:
        T = qtensor(gamma(V1), gamma(V2), par)
        rel = verify_qrelations(T, n_samples=args.samples)
        lim = 1e-7 if cfg.tol is None else cfg.tol
    out = {"alg": args.alg, "param": par, "rep": T.to_json(), "relations": _relations_block(rel, lim), "truncation": {"N_inner": P.n_inner}}
    return out, rel.worst < lim


def cmd_rmatrix(args, cfg: RunConfig):
    from .abelian_rmatrix import build_R0_qloop, build_R0_yangian, omega_h
    from .gamma_functor import gamma

    P = cfg.params()
    V1, V2 = parse_rep_spec(args.left, P), parse_rep_spec(args.right, P)
    pts = parse_points(args.at)
    if args.alg == "yangian":
        R = build_R0_yangian(V1, V2, args.side)
        trunc = {"N_inner": P.n_inner, "tail": True}
    else:
        if abs(abs(P.q) - 1.0) < 1e-12:
            raise UsageError("the q-loop R-matrix needs |q| != 1 (hbar must have a non-zero imaginary part)")
        R = build_R0_qloop(gamma(V1), gamma(V2), args.side)
        trunc = {"N_inner": P.n_inner, "qdifference": "geometric series to 1e-17"}
    values = [{"at": z, "value": R(z)} for z in pts]
    return {"alg": args.alg, "side": args.side, "omega_h": omega_h(V1, V2), "values": values, "truncation": trunc}, True


def cmd_gamma(args, cfg: RunConfig):
    from .gamma_functor import choose_constants, gamma, verify_qrelations

    P = cfg.params()
    V = parse_rep_spec(args.rep, P)
    W = gamma(V)
    rel = verify_qrelations(W, n_samples=args.samples)
    lim = 1e-7 if cfg.tol is None else cfg.tol
    meta = {k: v for k, v in W.meta.items() if k != "circles"}
    return {
        "rep": W.to_json(),
        "constants": choose_constants(V),
        "diagnostics": meta,
        "relations": _relations_block(rel, lim),
        "truncation": {"N_inner": meta.get("N", P.n_inner)},
    }, rel.worst < lim


def cmd_kd(args, cfg: RunConfig):
    from .gamma_functor import gamma
    from .qkz_kd import build_system, epsilon_for, integrability_residual, kd_check_n2, kd_grid, monodromy_cocycle

    P = cfg.params()
    ok, why = P.kd_ready()
    if not ok:
        return {"status": "skip", "reason": why}, True
    V1, V2 = parse_rep_spec(args.left, P), parse_rep_spec(args.right, P)
    W1, W2 = gamma(V1), gamma(V2)
    poles = [b / a for a in W1.sigma() for b in W2.sigma()]
    grid = kd_grid(P.q, V1.cartan.l, args.grid, poles)
    rep = kd_check_n2(V1, V2, grid=grid, convergence=not args.no_convergence)
    lim = 1e-5 if cfg.tol is None else cfg.tol
    out = {"n2": rep.to_json(), "limit": lim, "truncation": {"M": P.m_outer, "N_inner": P.n_inner, "N_outer": P.n_outer}}
    good = rep.worst < lim
    if args.n3:
        V3 = parse_rep_spec(args.n3, P)
        sy = build_system([V1, V2, V3], epsilon_for(P.q))
        s = np.array([0.13 + 0.05j, -0.21 + 0.11j, 0.37 - 0.08j])
        W = [W1, W2, gamma(V3)]
        cyc = []
        for sig, i in (((0, 1, 2), 0), ((0, 1, 2), 1), ((1, 0, 2), 1), ((0, 2, 1), 0)):
            d = monodromy_cocycle(sy, sig, i, s, W)
            cyc.append({"sigma": list(sig), "i": i, "deviation": d["deviation"], "adjacent": d["adjacent"], "flipped": d["flipped"]})
        integ = integrability_residual(sy, s)
        out["n3"] = {"s": s, "integrability": integ, "cocycles": cyc}
        good = good and integ < 1e-7 and max(c["deviation"] for c in cyc) < lim
    return out, good


def cmd_qkz(args, cfg: RunConfig):
    from .qkz_kd import build_system, canonical_solution, epsilon_for, integrability_residual

    P = cfg.params()
    if abs(abs(P.q) - 1.0) < 1e-12:
        return {"status": "skip", "reason": "|q| = 1"}, True
    reps = [parse_rep_spec(r, P) for r in args.rep]
    s = parse_points(args.at)
    if len(s) != len(reps):
        raise UsageError(f"--at needs {len(reps)} points, got {len(s)}")
    sigma = tuple(range(len(reps))) if args.sigma is None else tuple(int(x) for x in args.sigma.split(","))
    if sorted(sigma) != list(range(len(reps))):
        raise UsageError(f"--sigma must be a permutation of 0..{len(reps) - 1}")
    eps = epsilon_for(P.q)
    sy = build_system(reps, eps)
    Phi = canonical_solution(sy, sigma)
    s_arr = np.array(s)
    eq = max(float(np.max(np.abs(Phi(s_arr + np.eye(len(s))[i]) - sy.A(i, s_arr) @ Phi(s_arr)))) for i in range(len(s)))
    integ = integrability_residual(sy, s_arr)
    lim = 1e-7 if cfg.tol is None else cfg.tol
    return {
        "eps": eps,
        "sigma": list(sigma),
        "s": s,
        "value": Phi(s_arr),
        "equation_residual": eq,
        "integrability": integ,
        "limit": lim,
        "truncation": {"N_inner": P.n_inner, "N_outer": P.n_outer},
    }, max(eq, integ) < lim


def cmd_diffeq(args, cfg: RunConfig):
    from .diffeq import canonical_additive, channel_family
    from .ratfun import ZP

    zeros = parse_points(args.zeros) if args.zeros else []
    poles = parse_points(args.poles) if args.poles else []
    if len(zeros) != len(poles):
        raise UsageError("a regular equation needs as many zeros as poles")
    fam = channel_family(np.eye(1), [ZP(1.0, tuple(zeros), tuple(poles))])
    step = parse_complex(args.step)
    sol = canonical_additive(fam, step, args.side, cfg.trunc_inner)
    pts = parse_points(args.at)
    vals = []
    worst = 0.0
    for s in pts:
        v = complex(sol(s)[0, 0])
        res = abs(complex(sol(s + step)[0, 0]) - complex(fam(s)[0, 0]) * v)
        worst = max(worst, res)
        vals.append({"at": s, "value": v, "equation_residual": res})
    return {"side": args.side, "step": step, "values": vals, "truncation": {"N": cfg.trunc_inner, "tail": True}}, worst < 1e-8


def cmd_selftest(args, cfg: RunConfig):
    from .acceptance import overall_status, run_acceptance

    P = cfg.params()
    only = None if args.only is None else {int(x) for x in args.only.split(",")}
    lines = []

    results = run_acceptance(P, quick=args.quick, tol=cfg.tol, only=only, on_result=lambda r: lines.append(r.line()))
    crit = []
    for r in results:
        j = r.to_json()
        if not args.timings:
            j.pop("runtime_s")
        crit.append(j)
    status = overall_status(results)
    return {"quick": bool(args.quick), "status": status, "criteria": crit, "_lines": lines}, status != "fail"


COMMANDS = {
    "qcartan": cmd_qcartan,
    "rep": cmd_rep,
    "tensor": cmd_tensor,
    "rmatrix": cmd_rmatrix,
    "gamma": cmd_gamma,
    "kd": cmd_kd,
    "qkz": cmd_qkz,
    "diffeq": cmd_diffeq,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--hbar", default="0.2,0.3", help="deformation parameter as re,im (default 0.2,0.3)")
    common.add_argument("--tol", type=float, default=None, help="tighten every check limit to this value")
    common.add_argument("--trunc-inner", type=int, default=400, help="inner product truncation N")
    common.add_argument("--trunc-outer", type=int, default=400, help="outer product truncation")
    common.add_argument("--trunc-m", type=int, default=300, help="truncation M of the two-point connection sums")
    common.add_argument("--seed", type=int, default=20240531)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="output_format", action="store_const", const="json")
    fmt.add_argument("--table", dest="output_format", action="store_const", const="table")
    common.add_argument("--out", default=None, help="write output to this path instead of stdout")
    common.set_defaults(output_format="json")

    ap = argparse.ArgumentParser(prog="merotensor", description="Meromorphic tensor structures: exact Cartan data and numerical checks.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qcartan", parents=[common], help="exact inverse of the T-Cartan matrix")
    p.add_argument("type")
    p.add_argument("rank", type=int)

    p = sub.add_parser("rep", parents=[common], help="build a Yangian representation and check its relations")
    p.add_argument("--rep", required=True, help="ev:<a>, inline JSON, or a JSON file")
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("tensor", parents=[common], help="Drinfeld tensor product")
    p.add_argument("--alg", choices=["yangian", "qloop"], default="yangian")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--param", default="0", help="s (yangian) or zeta (qloop)")
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("rmatrix", parents=[common], help="commutative R-matrix values")
    p.add_argument("--alg", choices=["yangian", "qloop"], default="yangian")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--side", choices=["+", "-"], default="+")
    p.add_argument("--at", required=True, help="points, e.g. '0.3+0.1j,0.5j' or '0.3,0.1;0,0.5'")

    p = sub.add_parser("gamma", parents=[common], help="quantum loop representation of a Yangian representation")
    p.add_argument("--rep", required=True)
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("kd", parents=[common], help="connection matrix against the q-loop R-matrix")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--n3", default=None, help="third representation for the three-point system")
    p.add_argument("--grid", type=int, default=5)
    p.add_argument("--no-convergence", action="store_true", help="skip the truncation-doubling diagnostic")

    p = sub.add_parser("qkz", parents=[common], help="canonical solution of the abelian qKZ system")
    p.add_argument("--rep", action="append", required=True, help="repeat once per point")
    p.add_argument("--at", required=True)
    p.add_argument("--sigma", default=None, help="ordering, e.g. 1,0,2")

    p = sub.add_parser("diffeq", parents=[common], help="scalar canonical solution of f(s+step) = A(s) f(s)")
    p.add_argument("action", choices=["solve"])
    p.add_argument("--zeros", default="")
    p.add_argument("--poles", default="")
    p.add_argument("--step", default="0.4,0.6")
    p.add_argument("--side", choices=["+", "-"], default="+")
    p.add_argument("--at", required=True)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    p.add_argument("--timings", action="store_true", help="include runtimes in JSON (breaks bit-identity)")
    return ap


def _render_table(doc: dict) -> str:
    lines = [f"# config {json.dumps(doc['config'], sort_keys=True)}", f"# command {doc['command']}  status {doc['status']}"]
    res = doc["result"]
    if "_lines" in res:
        lines += res["_lines"]
        return "\n".join(lines) + "\n"
    if doc["command"] == "qcartan":
        lines.append(f"{res['type']}{res['rank']}: l = {res['l']}")
        for i, row in enumerate(res["C"]):
            cells = []
            for c in row:
                terms = sorted(c.items(), key=lambda kv: -int(kv[0]))
                cells.append(" + ".join((f"{v}" if v != 1 else "") + f"T^{k}" for k, v in terms) or "0")
            lines.append(f"C[{i + 1}] | " + " | ".join(cells))
        return "\n".join(lines) + "\n"

    def walk(prefix, x):
        if isinstance(x, dict):
            for k, v in x.items():
                walk(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(x, list) and x and isinstance(x[0], (dict, list)) and len(json.dumps(x)) > 200:
            for i, v in enumerate(x):
                walk(f"{prefix}[{i}]", v)
        else:
            lines.append(f"{prefix}: {json.dumps(x)}")

    walk("", res)
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        cfg = RunConfig(
            hbar=parse_complex(args.hbar),
            tol=args.tol,
            seed=args.seed,
            trunc_inner=args.trunc_inner,
            trunc_outer=args.trunc_outer,
            trunc_m=args.trunc_m,
            output_format=args.output_format,
        )
        if cfg.tol is not None and not cfg.tol > 0:
            raise UsageError("--tol must be positive")
        if min(cfg.trunc_inner, cfg.trunc_outer, cfg.trunc_m) < 8:
            raise UsageError("truncations must be at least 8")
        t0 = time.perf_counter()
        result, ok = COMMANDS[args.command](args, cfg)
        elapsed = time.perf_counter() - t0
    except (UsageError, CartanError) as e:
        print(f"merotensor {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    status = result.get("status", "pass" if ok else "fail")
    doc = {"config": cfg.to_json(), "command": args.command, "status": status, "result": to_jsonable(result)}
    if cfg.output_format == "table":
        text = _render_table(doc)
        text += f"# elapsed {elapsed:.2f}s\n"
    else:
        doc["result"].pop("_lines", None)
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
