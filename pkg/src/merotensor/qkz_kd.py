"""Abelian additive qKZ systems, their canonical solutions, and monodromy versus the multiplicative R-matrix.

Everything is diagonal in one basis of the total space, so products of
commuting factors become sums of channel logs.  The two-point connection

    S(s) = Phi_+(s)^-1 Phi_-(s) = prod_{m in Z} R(s + m)

is summed over |m| <= M and completed with the asymptotic coefficients r_k of
log R:  r_1 [psi(M+1-s) - psi(M+1+s)] + sum_{k>=2} r_k [zeta(k, M+1+s) + (-1)^k zeta(k, M+1-s)].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import psi

from .abelian_rmatrix import build_A_qloop, build_A_yangian, build_R0_qloop, build_R0_yangian, embed, omega_h
from .diffeq import CanonicalSolution, OperatorFamily, canonical_additive, connection_matrix, hurwitz_zeta
from .gamma_functor import gamma
from .yangian_rep import YangianRep

__all__ = [
    "epsilon_for",
    "kd_grid",
    "two_point_connection",
    "kd_check_n2",
    "QKZSystem",
    "build_system",
    "canonical_solution",
    "monodromy",
    "monodromy_cocycle",
    "cocycle_defect",
    "integrability_residual",
]


def epsilon_for(q: complex) -> str:
    """'+' when |q| < 1, '-' when |q| > 1."""
    if abs(abs(q) - 1.0) < 1e-12:
        raise ValueError("|q| = 1 has no KD side")
    return "+" if abs(q) < 1 else "-"


def kd_grid(q: complex, l: int, k: int = 5, avoid: Sequence[complex] = ()) -> np.ndarray:
    """k points on |zeta| = |q|^l rotated away from the arguments of ``avoid`` (pole rays)."""
    rad = abs(q) ** l
    angs = np.angle(np.asarray(avoid, dtype=complex)) if len(avoid) else np.array([])
    out = []
    j = 0
    while len(out) < k:
        th = 0.123 * 2 * np.pi + 2 * np.pi * j / (k + 1)
        j += 1
        if len(angs) and np.min(np.abs(np.angle(np.exp(1j * (angs - th))))) < 0.15:
            continue
        out.append(rad * np.exp(1j * th))
    return np.array(out)


def _zeta_to_s(zeta) -> np.ndarray:
    return np.log(np.asarray(zeta, dtype=complex)) / (2j * np.pi)


def two_point_connection(R: CanonicalSolution, M: int = 300, tail: bool = True) -> OperatorFamily:
    """S(s) = prod_m R(s+m) as a channel family in s (call ``.at_zeta`` for zeta input)."""
    if R.asym is None:
        raise ValueError("R family carries no asymptotic data")
    ms = np.arange(-M, M + 1)
    r = R.asym
    K = r.shape[1] - 1

    def logs(s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        pts = (s[:, None] + ms[None, :]).reshape(-1)
        body = R.logs(pts).reshape(len(s), len(ms), -1).sum(axis=1)
        if not tail:
            return body
        t = r[None, :, 1] * (psi(M + 1.0 - s) - psi(M + 1.0 + s))[:, None]
        for k in range(2, K + 1):
            if np.max(np.abs(r[:, k])) == 0:
                continue
            zk = hurwitz_zeta(k, M + 1.0 + s) + (-1) ** k * hurwitz_zeta(k, M + 1.0 - s)
            t = t + r[None, :, k] * zk[:, None]
        return body + t

    fam = OperatorFamily(R.dim, R.P, R.Pinv, logs, None, 0.0, None, None, True, {"M": M, "tail": tail})

    def at_zeta(z):
        return fam(_zeta_to_s(z))

    fam.at_zeta = at_zeta  # type: ignore[attr-defined]
    return fam


@dataclass
class KDReport:
    eps: str
    grid: np.ndarray
    deviations: np.ndarray
    qdiff_residual: float
    bridge_residual: float
    monodromy_A_residual: float
    anchor: dict
    convergence: list = field(default_factory=list)

    @property
    def worst(self) -> float:
        return float(np.max(self.deviations))

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "grid": [[complex(z).real, complex(z).imag] for z in self.grid],
            "deviations": [float(x) for x in self.deviations],
            "max_deviation": self.worst,
            "qdiff_residual": self.qdiff_residual,
            "bridge_residual": self.bridge_residual,
            "monodromy_A_residual": self.monodromy_A_residual,
            "anchor": self.anchor,
            "convergence": self.convergence,
        }


def kd_check_n2(
    V1: YangianRep,
    V2: YangianRep,
    grid: Sequence[complex] | None = None,
    eps: str | None = None,
    M: int | None = None,
    N: int | None = None,
    convergence: bool = True,
) -> KDReport:
    """max over the grid of |S^eps_{V1,V2}(zeta) - R^{0,eps}_{Gamma(V1),Gamma(V2)}(zeta)| plus proof-step oracles."""
    prm = V1.params
    ok, why = prm.kd_ready()
    if not ok:
        raise ValueError(f"KD check unavailable: {why}")
    eps = epsilon_for(prm.q) if eps is None else eps
    M = prm.m_outer if M is None else M
    N = prm.n_inner if N is None else N
    l = V1.cartan.l
    h = prm.hbar
    W1, W2 = gamma(V1, N=N), gamma(V2, N=N)
    Rq = build_R0_qloop(W1, W2, eps)
    A = build_A_yangian(V1, V2)
    R = build_R0_yangian(V1, V2, eps, N, A=A)
    S = two_point_connection(R, M)
    if grid is None:
        poles = [b / a for a in W1.sigma() for b in W2.sigma()]
        grid = kd_grid(prm.q, l, 5, poles)
    grid = np.asarray(grid, dtype=complex)
    dev = np.array([float(np.max(np.abs(S.at_zeta(z) - Rq(z)))) for z in grid])
    # S(q^{2l} zeta) S(zeta)^-1 against the multiplicative coefficient operator
    Aq = build_A_qloop(W1, W2)
    ss = _zeta_to_s(grid)
    qd = 0.0
    for s, z in zip(ss, grid):
        lhs = S(s + l * h) @ np.linalg.inv(S(s))
        qd = max(qd, float(np.max(np.abs(lhs - Aq(z)))))
    # Phi_pm(s + l hbar) Phi_pm(s)^-1 = A_pm(s), and prod_m A(s+m) = multiplicative A
    br = 0.0
    for side in "+-":
        Phi = canonical_additive(R, 1.0, side, prm.n_outer)
        Apm = canonical_additive(A, 1.0, side, N)
        for s in ss[:2]:
            br = max(br, float(np.max(np.abs(Phi(s + l * h) @ np.linalg.inv(Phi(s)) - Apm(s)))))
    conn = connection_matrix(A, N)
    mono = max(float(np.max(np.abs(conn(z) - Aq(z)))) for z in grid[:2])
    Om = omega_h(V1, V2)
    anchor = _anchor(S, Om, h, eps)
    rep = KDReport(eps, grid, dev, qd, br, mono, anchor)
    if convergence:
        for (Mc, Nc) in ((M // 4, N // 4), (M // 2, N // 2), (M, N)):
            Rc = build_R0_yangian(V1, V2, eps, Nc, A=A)
            Sc = two_point_connection(Rc, Mc, tail=False)
            d = max(float(np.max(np.abs(Sc.at_zeta(z) - Rq(z)))) for z in grid)
            rep.convergence.append({"M": Mc, "N": Nc, "tail": False, "deviation": d})
    return rep


def _anchor(S: OperatorFamily, Om: np.ndarray, h: complex, eps: str) -> dict:
    """Limit of S as Im s -> +-infinity compared with q^{+-Omega}."""
    out = {}
    for name, s in (("zeta->0", 0.31 + 12j), ("zeta->inf", 0.31 - 12j)):
        v = S(s)
        out[name] = {
            "vs_q^+Omega": float(np.max(np.abs(v - expm(1j * np.pi * h * Om)))),
            "vs_q^-Omega": float(np.max(np.abs(v - expm(-1j * np.pi * h * Om)))),
        }
    return out


# ---------------------------------------------------------------------------
# n points


@dataclass
class QKZSystem:
    reps: list
    eps: str
    R: dict  # (i, j) -> R^{0,eps}_{V_i,V_j} family, i < j
    dims: list[int]
    N_outer: int

    @property
    def n(self) -> int:
        return len(self.reps)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def R_emb(self, i: int, j: int, s: complex) -> np.ndarray:
        return embed(self.R[(i, j)](s), self.dims, (i, j))

    def A(self, i: int, s: Sequence[complex]) -> np.ndarray:
        """Coefficient of the shift in the i-th variable (0-based)."""
        s = list(s)
        out = np.eye(self.dim, dtype=complex)
        for k in range(i - 1, -1, -1):
            out = out @ np.linalg.inv(self.R_emb(k, i, s[k] - s[i] - 1))
        for k in range(self.n - 1, i, -1):
            out = out @ self.R_emb(i, k, s[i] - s[k])
        return out


def build_system(reps: Sequence[YangianRep], eps: str, N: int | None = None, N_outer: int | None = None) -> QKZSystem:
    prm = reps[0].params
    if abs(abs(prm.q) - 1.0) < 1e-12:
        raise ValueError("|q| = 1")
    N = prm.n_inner if N is None else N
    N_outer = prm.n_outer if N_outer is None else N_outer
    R = {}
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            R[(i, j)] = build_R0_yangian(reps[i], reps[j], eps, N)
    return QKZSystem(list(reps), eps, R, [V.dim for V in reps], N_outer)


def integrability_residual(sys: QKZSystem, s: Sequence[complex]) -> float:
    worst = 0.0
    for i in range(sys.n):
        for j in range(sys.n):
            if i == j:
                continue
            ei = np.eye(sys.n)[i]
            ej = np.eye(sys.n)[j]
            lhs = sys.A(i, np.asarray(s) + ej) @ sys.A(j, s)
            rhs = sys.A(j, np.asarray(s) + ei) @ sys.A(i, s)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _c_sets(sigma: Sequence[int]) -> tuple[list, list]:
    """C^+(sigma), C^-(sigma) for a permutation given as a tuple (0-based images)."""
    inv = np.argsort(sigma)
    n = len(sigma)
    cp, cm = [], []
    for i in range(n):
        for j in range(i + 1, n):
            (cp if inv[i] < inv[j] else cm).append((i, j))
    return cp, cm


def canonical_solution(sys: QKZSystem, sigma: Sequence[int]):
    """Phi_sigma(s) = prod_{C+} Phi_+(s_i - s_j) prod_{C-} Phi_-(s_i - s_j) on the legs (i, j)."""
    cp, cm = _c_sets(sigma)
    sols = {}
    for (i, j) in cp:
        sols[(i, j)] = canonical_additive(sys.R[(i, j)], 1.0, "+", sys.N_outer)
    for (i, j) in cm:
        sols[(i, j)] = canonical_additive(sys.R[(i, j)], 1.0, "-", sys.N_outer)

    def Phi(s):
        s = list(s)
        out = np.eye(sys.dim, dtype=complex)
        for (i, j) in cp + cm:
            out = out @ embed(sols[(i, j)](s[i] - s[j]), sys.dims, (i, j))
        return out

    Phi.cp = cp  # type: ignore[attr-defined]
    Phi.cm = cm  # type: ignore[attr-defined]
    return Phi


def _transpose_compose(i: int, sigma: Sequence[int]) -> tuple[int, ...]:
    """(i i+1) o sigma."""
    t = list(range(len(sigma)))
    t[i], t[i + 1] = t[i + 1], t[i]
    return tuple(t[k] for k in sigma)


def monodromy(sys: QKZSystem, sigma: Sequence[int], tau: Sequence[int], s: Sequence[complex]) -> np.ndarray:
    return np.linalg.inv(canonical_solution(sys, sigma)(s)) @ canonical_solution(sys, tau)(s)


def monodromy_cocycle(sys: QKZSystem, sigma: Sequence[int], i: int, s: Sequence[complex], qreps=None) -> dict:
    """Phi_sigma^-1 Phi_{s_i sigma} against products of embedded R^{0,eps}(zeta_a / zeta_b)^{+-1}.

    Left multiplication by the transposition (i i+1) swaps points i and i+1 in
    the ordering sigma(0), sigma(1), ...  Only the pair (i, i+1) changes side
    when the two points are adjacent in that ordering; otherwise every pair
    (i, k), (k, i+1) with k between them flips as well, and each flipped pair
    contributes its own factor.  ``adjacent`` reports which case applies.
    """
    tau = _transpose_compose(i, sigma)
    Mval = monodromy(sys, sigma, tau, s)
    cp, cm = _c_sets(sigma)
    tp, _ = _c_sets(tau)
    if qreps is None:
        qreps = [gamma(V) for V in sys.reps]
    target = np.eye(sys.dim, dtype=complex)
    flipped = []
    for (a, b) in cp + cm:
        if ((a, b) in cp) == ((a, b) in tp):
            continue
        sign = +1 if (a, b) in cp else -1
        Rq = build_R0_qloop(qreps[a], qreps[b], sys.eps)
        za, zb = np.exp(2j * np.pi * s[a]), np.exp(2j * np.pi * s[b])
        f = embed(Rq(za / zb), sys.dims, (a, b))
        target = target @ (f if sign > 0 else np.linalg.inv(f))
        flipped.append(((a, b), sign))
    pos = list(sigma)
    adjacent = abs(pos.index(i) - pos.index(i + 1)) == 1
    sign = dict(flipped).get((i, i + 1), 0)
    return {"deviation": float(np.max(np.abs(Mval - target))), "sign": sign, "tau": tau, "flipped": flipped, "adjacent": adjacent, "value": Mval}


def cocycle_defect(sys: QKZSystem, sigma, tau, rho, s) -> float:
    """|M(sigma, tau) M(tau, rho) - M(sigma, rho)|."""
    lhs = monodromy(sys, sigma, tau, s) @ monodromy(sys, tau, rho, s)
    return float(np.max(np.abs(lhs - monodromy(sys, sigma, rho, s))))
