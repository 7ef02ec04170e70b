"""The eight acceptance criteria as runnable checks with measured residuals and timings.

Each criterion returns a :class:`CriterionResult`.  A check passes when its
residual is below its limit.  When it is not, and the limit is tighter than
the accuracy floor the run can certify (truncation estimate or rounding
level), the check is reported ``inconclusive`` rather than ``fail``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .cartan import (
    GlobalParams,
    LaurentPolyZ,
    QFraction,
    SUPPORTED_TYPES,
    build_cartan,
    fundamental_coweights_q,
    t_number,
    t_symmetric,
)

__all__ = [
    "Check",
    "CriterionResult",
    "ROUNDING_FLOOR",
    "EXPECTED_L",
    "CRITERIA",
    "run_acceptance",
    "overall_status",
]

# Smallest residual the double-precision pipelines certify.
ROUNDING_FLOOR = 1e-11

# l per type in Bourbaki labels with short roots of length d = 1.
EXPECTED_L: dict[str, Callable[[int], int]] = {
    "A": lambda n: n + 1,
    "B": lambda n: 2 * (2 * n - 1),
    "C": lambda n: 2 * (n + 1),
    "D": lambda n: 2 * n - 2,
    "E": lambda n: {6: 12, 7: 18, 8: 30}[n],
    "F": lambda n: 18,
    "G": lambda n: 12,
}

SEED_POINTS = (0.1, 0.45 + 0.2j, -0.3 + 0.15j)
S_POINTS = (0.31 + 0.12j, -0.2 + 0.4j, 0.57 - 0.23j, -0.64 - 0.11j, 0.13 + 0.71j)


@dataclass
class Check:
    name: str
    value: float
    limit: float
    floor: float = ROUNDING_FLOOR
    status: str = ""
    note: str = ""

    def __post_init__(self):
        if self.status:
            return
        if not np.isfinite(self.value):
            self.status = "fail"
        elif self.value < self.limit:
            self.status = "pass"
        elif self.limit < self.floor:
            self.status = "inconclusive"
        else:
            self.status = "fail"

    def to_json(self) -> dict:
        out = {"name": self.name, "value": self.value, "limit": self.limit, "floor": self.floor, "status": self.status}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    runtime: float = 0.0
    runtime_limit: float = float("inf")
    truncation: dict = field(default_factory=dict)
    note: str = ""
    skipped: bool = False

    @property
    def status(self) -> str:
        if self.skipped:
            return "skip"
        states = {c.status for c in self.checks}
        if "fail" in states or self.runtime >= self.runtime_limit:
            return "fail"
        if "inconclusive" in states:
            return "inconclusive"
        return "pass"

    @property
    def worst(self) -> Check | None:
        live = [c for c in self.checks if c.status != "skip"]
        if not live:
            return None
        return max(live, key=lambda c: c.value / c.limit if c.limit > 0 else np.inf)

    def line(self) -> str:
        w = self.worst
        detail = f"worst {w.name}={w.value:.2e} (limit {w.limit:.0e})" if w else self.note
        return f"[{self.status.upper():>12}] criterion {self.number}: {self.title}; {detail}; {self.runtime:.2f}s (limit {self.runtime_limit:g}s)"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "status": self.status,
            "runtime_s": round(self.runtime, 3),
            "runtime_limit_s": self.runtime_limit,
            "truncation": self.truncation,
            "note": self.note,
            "checks": [c.to_json() for c in self.checks],
        }


def _lim(spec_limit: float, tol: float | None) -> float:
    """A user tolerance may tighten a limit, never loosen it."""
    return spec_limit if tol is None else min(spec_limit, tol)


def _mx(a) -> float:
    return float(np.max(np.abs(a)))


def _seeds(P: GlobalParams):
    from .yangian_rep import ev_sl2

    return [ev_sl2(P, a) for a in SEED_POINTS]


# ---------------------------------------------------------------------------


def crit1(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    res = CriterionResult(1, "T-Cartan inversion, all finite types through rank 8", runtime_limit=1.0)
    t0 = time.perf_counter()
    bad_identity, bad_sign, bad_l = [], [], []
    cds = {}
    for t, n in SUPPORTED_TYPES:
        cd = build_cartan(t, n)
        cds[t, n] = cd
        BT = cd.B_T()
        for i in range(n):
            for j in range(n):
                acc = sum((BT[i][k] * cd.C[k][j] for k in range(n)), LaurentPolyZ())
                if acc != (t_number(cd.l) if i == j else LaurentPolyZ()):
                    bad_identity.append(f"{cd.label}[{i},{j}]")
                if any(v < 0 for v in cd.C[i][j].coeffs.values()):
                    bad_sign.append(f"{cd.label}[{i},{j}]")
        if cd.l != EXPECTED_L[t](n):
            bad_l.append(f"{cd.label}: {cd.l}")
    w = t_symmetric
    e8 = fundamental_coweights_q(cds["E", 8])[7][7] == QFraction(w(5) * w(9), w(15))
    # the frozen F4 table numbers nodes in reverse: its alpha_4 is our node 1
    f4 = fundamental_coweights_q(cds["F", 4])[0][0] == QFraction(w(3) * w(4), t_number(2) * w(9))
    res.runtime = time.perf_counter() - t0
    res.checks = [
        Check("B(T)C(T)=[l]Id", float(len(bad_identity)), 0.5, 0.0, note=", ".join(bad_identity)),
        Check("negative coefficients", float(len(bad_sign)), 0.5, 0.0, note=", ".join(bad_sign)),
        Check("l table", float(len(bad_l)), 0.5, 0.0, note=", ".join(bad_l)),
        Check("E8 coweight 8, alpha_8 coefficient", float(not e8), 0.5, 0.0),
        Check("F4 coweight 4, alpha_4 coefficient", float(not f4), 0.5, 0.0),
    ]
    res.truncation = {"exact": True, "types": len(SUPPORTED_TYPES)}
    return res


def crit2(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    from .drinfeld_tensor import check_associativity, ytensor
    from .yangian_rep import verify_relations

    res = CriterionResult(2, "Yangian relations on seeds and tensors up to dim 8", runtime_limit=10.0)
    t0 = time.perf_counter()
    ns = 20 if quick else 100
    lim = _lim(1e-8, tol)
    V1, V2, V3 = _seeds(P)
    s1, s2 = 0.33 + 0.1j, -0.41 + 0.2j
    reps = {
        "ev(a1)": V1,
        "ev(a2)": V2,
        "ev(a3)": V3,
        "ev(a1)(x)ev(a2)": ytensor(V1, V2, s1),
        "ev(a2)(x)ev(a3)": ytensor(V2, V3, s2),
        "(ev(a1)(x)ev(a2))(x)ev(a3)": ytensor(ytensor(V1, V2, s1), V3, s2),
    }
    for name, V in reps.items():
        rep = verify_relations(V, n_samples=ns)
        worst_rel = max(rep.residuals, key=rep.residuals.get)
        res.checks.append(Check(f"relations {name} (dim {V.dim})", rep.worst, lim, note=f"worst {worst_rel}"))
    res.checks.append(Check("associativity", check_associativity(V1, V2, V3, s1, s2), lim))
    res.runtime = time.perf_counter() - t0
    res.truncation = {"n_samples": ns}
    return res


def crit3(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    from .abelian_rmatrix import build_A_yangian, flip, omega_h, quadratic_coefficient

    res = CriterionResult(3, "coefficient operator: s^-2 term and shifted unitarity")
    t0 = time.perf_counter()
    V1, V2, _ = _seeds(P)
    h = P.hbar
    l = V1.cartan.l
    A = build_A_yangian(V1, V2)
    A21 = build_A_yangian(V2, V1)
    target = -l * h**2 * omega_h(V1, V2)
    c2 = quadratic_coefficient(A)
    rel = _mx(c2 - target) / _mx(target)
    # a second fit on a shifted radius window estimates the fit error itself
    c2b = quadratic_coefficient(A, radii=(2e3, 6e3, 2e4, 6e4, 2e5))
    fit_floor = max(_mx(c2 - c2b) / _mx(target), ROUNDING_FLOOR)
    F = flip(2, 2)
    unit = max(_mx(F @ A(-s) @ F.T - A21(s - l * h)) for s in S_POINTS[: 2 if quick else 5])
    res.checks = [
        Check("s^-2 coefficient vs -l hbar^2 Omega (relative)", rel, _lim(1e-6, tol), fit_floor),
        Check("shifted unitarity", unit, _lim(1e-8, tol)),
    ]
    res.runtime = time.perf_counter() - t0
    res.truncation = {"series_terms": 40, "fit_radii": [1e3, 1e5], "fit_floor": fit_floor}
    return res


def crit4(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    from .abelian_rmatrix import build_A_yangian, build_R0_yangian, embed, flip, intertwiner_defect, omega_h
    from .drinfeld_tensor import ytensor
    from .yangian_rep import shift

    res = CriterionResult(4, "R^{0,+-} properties on the sl2 pair", runtime_limit=60.0)
    t0 = time.perf_counter()
    V1, V2, V3 = _seeds(P)
    h = P.hbar
    l = V1.cartan.l
    N = P.n_inner
    A = build_A_yangian(V1, V2)
    R = {side: build_R0_yangian(V1, V2, side, N, A=A) for side in "+-"}
    Rh = {side: build_R0_yangian(V1, V2, side, N // 2, A=A) for side in "+-"}
    R21 = {side: build_R0_yangian(V2, V1, side, N) for side in "+-"}
    F = flip(2, 2)
    pts = S_POINTS[: 2 if quick else 5]
    trunc = max(_mx(R[sd](s) - Rh[sd](s)) for sd in "+-" for s in pts)
    floor = max(trunc, ROUNDING_FLOOR)

    dq = max(_mx(R[sd](s + l * h) - A(s) @ R[sd](s)) for sd in "+-" for s in pts)
    un = max(_mx(F @ R[sd](-s) @ F.T @ R21["-" if sd == "+" else "+"](s) - np.eye(4)) for sd in "+-" for s in pts)
    Om = omega_h(V1, V2)
    d = h / abs(h)
    def jet_at(r):
        return max(_mx(R[sd](sg * r * d) - np.eye(4) - h * Om / (sg * r * d)) for sd, sg in (("+", 1), ("-", -1)))

    jet = jet_at(1e3)
    # the residual is the s^-2 remainder itself; 4x its value at 2e3 is what |s|=1e3 can resolve
    jet_floor = max(4.0 * jet_at(2e3), floor)
    itw = max(intertwiner_defect(R[sd], V1, V2, s) for sd in "+-" for s in pts[:2])

    s1, s2 = 0.33 + 0.1j, -0.41 + 0.2j
    cab = 0.0
    for sd in "+-":
        R13 = build_R0_yangian(V1, V3, sd, N)
        R23 = build_R0_yangian(V2, V3, sd, N)
        left = build_R0_yangian(ytensor(V1, V2, s1), V3, sd, N)(s2)
        cab = max(cab, _mx(left - embed(R13(s1 + s2), [2, 2, 2], (0, 2)) @ embed(R23(s2), [2, 2, 2], (1, 2))))
        right = build_R0_yangian(V1, ytensor(V2, V3, s2), sd, N)(s1 + s2)
        cab = max(cab, _mx(right - embed(R13(s1 + s2), [2, 2, 2], (0, 2)) @ embed(R[sd](s1), [2, 2, 2], (0, 1))))
    a, b = 0.17 - 0.05j, -0.08 + 0.12j
    shf = max(_mx(build_R0_yangian(shift(V1, a), shift(V2, b), sd, N)(pts[0]) - R[sd](pts[0] + a - b)) for sd in "+-")

    res.checks = [
        Check("difference equation", dq, _lim(1e-8, tol), floor),
        Check("unitarity", un, _lim(1e-8, tol), floor),
        Check("cabling", cab, _lim(1e-7, tol), floor),
        Check("shift covariance", shf, _lim(1e-7, tol), floor),
        Check("1-jet at |s|=1e3", jet, _lim(1e-5, tol), jet_floor),
        Check("intertwiner", itw, _lim(1e-7, tol), floor),
    ]
    res.runtime = time.perf_counter() - t0
    res.truncation = {"N_inner": N, "truncation_estimate": trunc}
    return res


def crit5(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    from .gamma_functor import gamma, gamma_shift_check, verify_qrelations

    res = CriterionResult(5, "functor on ev_sl2: QL relations, sine ratio, shift")
    t0 = time.perf_counter()
    V1, _, _ = _seeds(P)
    a = SEED_POINTS[0]
    W = gamma(V1)
    rep = verify_qrelations(W, n_samples=20 if quick else 100)
    q = P.q
    al = np.exp(2j * np.pi * a)
    zs = [1.7 - 0.4j, -0.6 + 0.9j, 0.2 + 0.3j, 2.5j]
    closed = 0.0
    for z in zs:
        expect = np.diag([q * (z - al / q**2) / (z - al), (z - q**2 * al) / (q * (z - al))])
        closed = max(closed, _mx(W.psi[0].eval(z) - expect))
    anchor = float(W.meta["anchor_residual"])
    floor = max(ROUNDING_FLOOR, float(W.meta.get("guard_residual", 0.0)))
    res.checks = [
        Check(f"QL relations (worst {max(rep.residuals, key=rep.residuals.get)})", rep.worst, _lim(1e-7, tol), floor),
        Check("Psi vs sine-ratio closed form", closed, _lim(1e-8, tol), floor),
        Check("anchor Psi(inf) = exp(i pi hbar xi_0)", anchor, _lim(1e-8, tol), floor),
        Check("shift compatibility", gamma_shift_check(V1, 0.37 + 0.05j), _lim(1e-7, tol), floor),
    ]
    res.runtime = time.perf_counter() - t0
    res.truncation = {"N_inner": P.n_inner, "guard_residual": float(W.meta.get("guard_residual", 0.0))}
    return res


def crit6(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    from .abelian_rmatrix import SideConditionError, build_twist_J, twist_intertwines
    from .drinfeld_tensor import ytensor

    res = CriterionResult(6, "twist J^eps: intertwining and associativity", runtime_limit=300.0)
    t0 = time.perf_counter()
    V1, V2, V3 = _seeds(P)
    pts = S_POINTS[: 2 if quick else 5]
    s1, s2 = 0.33 + 0.1j, -0.41 + 0.2j
    I2 = np.eye(2)
    notes = []
    for eps in "+-":
        try:
            J = build_twist_J(V1, V2, eps)
        except SideConditionError as e:
            res.checks.append(Check(f"eps={eps}", np.nan, 1e-6, status="skip", note=str(e)))
            notes.append(f"eps={eps} skipped: {e}")
            continue
        Jh = build_twist_J(V1, V2, eps, P.n_inner // 2, P.n_outer // 2)
        trunc = max(_mx(J(s) - Jh(s)) for s in pts)
        floor = max(trunc, ROUNDING_FLOOR)
        itw = max(max(twist_intertwines(V1, V2, eps, s, J).values()) for s in pts)
        lhs = build_twist_J(ytensor(V1, V2, s1), V3, eps)(s2) @ np.kron(J(s1), I2)
        rhs = build_twist_J(V1, ytensor(V2, V3, s2), eps)(s1 + s2) @ np.kron(I2, build_twist_J(V2, V3, eps)(s2))
        res.checks.append(Check(f"intertwining eps={eps}", itw, _lim(1e-6, tol), floor))
        res.checks.append(Check(f"associativity diagram eps={eps}", _mx(lhs - rhs), _lim(1e-6, tol), floor))
        res.truncation[f"truncation_estimate_{eps}"] = trunc
    res.runtime = time.perf_counter() - t0
    res.truncation.update({"N_inner": P.n_inner, "N_outer": P.n_outer, "s_points": len(pts)})
    res.note = "; ".join(notes)
    return res


def crit7(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    from .qkz_kd import kd_check_n2

    res = CriterionResult(7, "two-point Kohno-Drinfeld comparison", runtime_limit=600.0)
    ok, why = P.kd_ready()
    if not ok:
        res.skipped = True
        res.note = f"skipped: {why}"
        return res
    t0 = time.perf_counter()
    runs = [("hbar", P)] if quick else [("hbar", P), ("conj(hbar)", replace(P, hbar=complex(P.hbar).conjugate()))]
    for label, Q in runs:
        from .yangian_rep import ev_sl2

        V1, V2 = ev_sl2(Q, SEED_POINTS[0]), ev_sl2(Q, SEED_POINTS[1])
        rep = kd_check_n2(V1, V2, convergence=not quick)
        half = kd_check_n2(V1, V2, M=Q.m_outer // 2, N=Q.n_inner // 2, convergence=False)
        floor = max(abs(rep.worst - half.worst), ROUNDING_FLOOR)
        res.checks.append(Check(f"grid deviation {label} (eps={rep.eps})", rep.worst, _lim(1e-5, tol), floor))
        res.checks.append(Check(f"q-difference cross-check {label}", rep.qdiff_residual, _lim(1e-5, tol), floor))
        if rep.convergence:
            devs = [c["deviation"] for c in rep.convergence]
            mono = all(b < a for a, b in zip(devs, devs[1:]))
            res.checks.append(
                Check(f"deviation decreases under doubling {label}", float(not mono), 0.5, 0.0, note=", ".join(f"{d:.2e}" for d in devs))
            )
        res.truncation[label] = {"eps": rep.eps, "M": Q.m_outer, "N_inner": Q.n_inner, "grid": [[float(z.real), float(z.imag)] for z in rep.grid]}
    res.runtime = time.perf_counter() - t0
    return res


def crit8(P: GlobalParams, quick: bool = False, tol: float | None = None) -> CriterionResult:
    from .gamma_functor import gamma
    from .qkz_kd import build_system, epsilon_for, integrability_residual, monodromy_cocycle

    res = CriterionResult(8, "three-point qKZ: integrability and monodromy", runtime_limit=600.0)
    ok, why = P.kd_ready()
    if not ok:
        res.skipped = True
        res.note = f"skipped: {why}"
        return res
    t0 = time.perf_counter()
    reps = _seeds(P)
    eps = epsilon_for(P.q)
    sy = build_system(reps, eps)
    s = np.array([0.13 + 0.05j, -0.21 + 0.11j, 0.37 - 0.08j])
    integ = integrability_residual(sy, s)
    W = [gamma(V) for V in reps]
    cases = [((0, 1, 2), 0), ((0, 1, 2), 1)] if quick else [((0, 1, 2), 0), ((0, 1, 2), 1), ((1, 0, 2), 1), ((0, 2, 1), 0), ((2, 1, 0), 0)]
    worst = 0.0
    for sig, i in cases:
        worst = max(worst, monodromy_cocycle(sy, sig, i, s, W)["deviation"])
    res.checks = [
        Check("integrability", integ, _lim(1e-7, tol)),
        Check("monodromy vs embedded R^{0,eps}", worst, _lim(1e-5, tol)),
    ]
    res.runtime = time.perf_counter() - t0
    res.truncation = {"eps": eps, "N_inner": P.n_inner, "N_outer": sy.N_outer, "cases": len(cases)}
    return res


CRITERIA = {1: crit1, 2: crit2, 3: crit3, 4: crit4, 5: crit5, 6: crit6, 7: crit7, 8: crit8}


def run_acceptance(P: GlobalParams | None = None, quick: bool = False, tol: float | None = None, only=None, on_result=None) -> list[CriterionResult]:
    P = GlobalParams() if P is None else P
    out = []
    for k, fn in CRITERIA.items():
        if only is not None and k not in only:
            continue
        r = fn(P, quick=quick, tol=tol)
        out.append(r)
        if on_result is not None:
            on_result(r)
    return out


def overall_status(results: list[CriterionResult]) -> str:
    states = {r.status for r in results}
    if "fail" in states:
        return "fail"
    if "inconclusive" in states:
        return "inconclusive"
    return "pass"
