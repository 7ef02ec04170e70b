"""Canonical solutions of regular additive and multiplicative difference equations.

Families are handled channel by channel in a fixed eigenbasis.  Each channel
supplies a scalar log (any branch; only exponentials are used) and the
coefficients r_k of its asymptotic expansion ``log f(w) ~ sum_k r_k w^-k``.
Truncated sums are completed with closed-form tails:

    sum_{n>N} 1/(x+n) - 1/n        via the digamma function,
    sum_{n>N} (x+n)^-k, k >= 2     via the Hurwitz zeta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import bernoulli, psi

from .ratfun import ZP, RationalMatrixFunction

__all__ = [
    "EULER_GAMMA",
    "EULER_GAMMA_DIGITS",
    "DivergenceError",
    "OperatorFamily",
    "CanonicalSolution",
    "hurwitz_zeta",
    "channel_family",
    "canonical_additive",
    "connection_matrix",
    "canonical_qdifference",
    "ordered_product_solution",
    "direct_connection_product",
    "sine_ratio_channel",
]

EULER_GAMMA_DIGITS = "0.577215664901532860606512090082"
EULER_GAMMA = float(EULER_GAMMA_DIGITS)


class DivergenceError(RuntimeError):
    """Truncated product is not in its asymptotic regime (partial sums not Cauchy)."""


_BERN = bernoulli(40)


def hurwitz_zeta(k: int, x, terms: int = 10, min_abs: float = 30.0):
    """zeta(k, x) = sum_{n>=0} (x+n)^-k for integer k >= 2 and complex x off the negative axis.

    Direct summation lifts x until |x| >= min_abs, then Euler-Maclaurin with
    ``terms`` Bernoulli corrections.
    """
    if k < 2:
        raise ValueError("hurwitz_zeta needs k >= 2")
    x = np.asarray(x, dtype=complex)
    out = np.zeros(x.shape, dtype=complex)
    y = x.copy()
    small = np.abs(y) < min_abs
    guard = 0
    while np.any(small):
        out[small] += y[small] ** (-k)
        y[small] += 1.0
        small = np.abs(y) < min_abs
        guard += 1
        if guard > 10_000:
            raise ValueError("hurwitz_zeta argument too close to the negative real axis")
    acc = y ** (1 - k) / (k - 1) + 0.5 * y ** (-k)
    rising = float(k)  # (k)_(2j-1)
    for j in range(1, terms + 1):
        if j > 1:
            rising *= (k + 2 * j - 3) * (k + 2 * j - 2)
        acc = acc + _BERN[2 * j] / math.factorial(2 * j) * rising * y ** (-k - 2 * j + 1)
    return out + acc


def _tail_forward(r: np.ndarray, x, N: int):
    """sum_{n>N} [sum_k r_k (x+n)^-k - r_1/n] with x = s/step already scaled (r_k scaled accordingly)."""
    x = np.asarray(x, dtype=complex)
    t = r[1] * (psi(N + 1.0) - psi(N + 1.0 + x))
    for k in range(2, len(r)):
        if r[k] != 0:
            t = t + r[k] * hurwitz_zeta(k, N + 1.0 + x)
    return t


@dataclass
class OperatorFamily:
    """Commuting matrix family, diagonal in the basis ``P`` with scalar channels.

    ``log_channels(s)`` returns an array of shape (len(s), n_channels).
    ``asym`` holds r_k (k = 0..K) per channel, shape (n_channels, K+1), with r_0 = 0
    for families normalized to 1 at infinity; ``asym_radius`` bounds |w| below
    which the expansion must not be used.
    """

    dim: int
    P: np.ndarray
    Pinv: np.ndarray
    log_channels: Callable[[np.ndarray], np.ndarray]
    asym: np.ndarray | None = None
    asym_radius: float = 0.0
    rational: RationalMatrixFunction | None = None
    A0: np.ndarray | None = None
    commuting: bool = True
    truncation: dict = field(default_factory=dict)
    zp: list[ZP] | None = None

    def logs(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return self.log_channels(s)

    def __call__(self, s) -> np.ndarray:
        scalar = np.ndim(s) == 0
        L = self.logs(s)
        out = np.einsum("ab,nb,bc->nac", self.P, np.exp(L), self.Pinv)
        return out[0] if scalar else out

    def diag_values(self, s) -> np.ndarray:
        return np.exp(self.logs(s))

    def channel_values_matrix(self, values: np.ndarray) -> np.ndarray:
        return self.P @ np.diag(values) @ self.Pinv

    def exponent(self) -> np.ndarray:
        """First asymptotic coefficient r_1 per channel (the A_0 of A = 1 + A_0/s + ...)."""
        if self.asym is None:
            raise ValueError("family has no asymptotic data")
        return self.asym[:, 1]


def channel_family(P: np.ndarray, channels: Sequence[ZP], K: int = 40, rational: RationalMatrixFunction | None = None) -> OperatorFamily:
    """Family built from exact zero/pole channels, each normalized to 1 at infinity."""
    P = np.asarray(P, dtype=complex)
    Pinv = np.linalg.inv(P)
    chans = list(channels)
    for z in chans:
        if z.degree_gap != 0 or abs(z.c - 1) > 1e-12:
            raise ValueError("channel must tend to 1 at infinity")
    radius = max([abs(x) for z in chans for x in z.zeros + z.poles] + [0.0])

    def logs(s):
        return np.stack([z.log_at(s) for z in chans], axis=-1)

    asym = np.stack([z.log_series_coeffs(K) for z in chans])
    A0 = P @ np.diag(asym[:, 1]) @ Pinv
    return OperatorFamily(len(chans), P, Pinv, logs, asym, radius, rational, A0, True, {}, chans)


@dataclass
class CanonicalSolution(OperatorFamily):
    side: str = "+"
    step: complex = 1.0
    parent: OperatorFamily | None = None


def _series_terms_needed(radius: float, wmin: float, eps: float = 1e-17, cap: int = 40) -> int:
    if radius == 0:
        return 2
    ratio = radius / max(wmin, 1e-300)
    if ratio >= 0.5:
        return cap
    return int(min(cap, max(2, math.ceil(math.log(eps) / math.log(ratio)) + 1)))


def canonical_additive(A: OperatorFamily, step: complex, side: str, N: int = 400, tail: bool = True) -> CanonicalSolution:
    """Right ('+') or left ('-') canonical solution of sol(s + step) = A(s) sol(s).

    '+':  sol(s) = [e^{gamma A0/step} A(s) prod_{n>=1} A(s + n step) e^{-A0/(n step)}]^-1
    '-':  sol(s) = e^{-gamma A0/step} prod_{n>=1} A(s - n step) e^{A0/(n step)}
    so that sol(s) ~ (+-s/step)^{A0/step}.
    """
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    if A.asym is None:
        raise ValueError("canonical_additive needs asymptotic channel data")
    step = complex(step)
    r1 = A.asym[:, 1]
    sgn = 1 if side == "+" else -1
    K = A.asym.shape[1] - 1
    ns = np.arange(1, N + 1)
    # tail coefficients in the scaled variable x = +-s/step: r_k (sgn*step)^-k
    scaled = A.asym * (sgn * step) ** (-np.arange(K + 1.0))

    def logs(s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        wmin = float(np.min(np.abs(s[:, None] + sgn * (N + 1) * step)))
        kk = _series_terms_needed(A.asym_radius, wmin)
        if wmin <= 2 * A.asym_radius:
            raise DivergenceError(f"truncation N={N} too small for |s| up to {np.max(np.abs(s)):.3g}")
        pts = s[:, None] + sgn * ns[None, :] * step
        body = A.logs(pts.reshape(-1)).reshape(len(s), N, -1)
        body = body - sgn * r1[None, None, :] / (ns[None, :, None] * step)
        total = body.sum(axis=1)
        if tail:
            x = sgn * s / step
            tl = np.stack([_tail_forward(scaled[c, : kk + 1], x, N) for c in range(A.dim)], axis=-1)
            total = total + tl
        g = EULER_GAMMA * r1[None, :] / step
        if side == "+":
            return -(g + A.logs(s) + total)
        return -g + total

    exponent = r1 / step
    asym = None
    if np.max(np.abs(r1)) < 1e-14:
        asym = _solution_asym(A.asym, step, side)
    return CanonicalSolution(
        A.dim,
        A.P,
        A.Pinv,
        logs,
        asym,
        A.asym_radius + abs(step),
        None,
        A.P @ np.diag(exponent) @ A.Pinv,
        True,
        {"N": N, "tail": "digamma+hurwitz" if tail else "none"},
        None,
        side,
        step,
        A,
    )


def _solution_asym(e: np.ndarray, step: complex, side: str, J: int = 8) -> np.ndarray:
    """Asymptotic log coefficients of prod_{n>=0} A(s+n step)^-1 (or prod_{n>=1} A(s-n step)).

    Requires e_1 = 0.  Both sides share the expansion
    -sum_p e_p c_{p,j} step^(j-1) w^-(p+j-1), with c_{p,0}=1/(p-1), c_{p,1}=1/2,
    c_{p,2k} = B_{2k}/(2k)! (p)_{2k-1}.
    """
    nch, P1 = e.shape
    Kout = P1 + 2 * J
    out = np.zeros((nch, Kout), dtype=complex)
    for p in range(2, P1):
        coeffs = {0: 1.0 / (p - 1), 1: 0.5}
        rising = float(p)
        for k in range(1, J + 1):
            if k > 1:
                rising *= (p + 2 * k - 3) * (p + 2 * k - 2)
            coeffs[2 * k] = _BERN[2 * k] / math.factorial(2 * k) * rising
        for j, c in coeffs.items():
            kk = p + j - 1
            if kk < Kout:
                out[:, kk] += -e[:, p] * c * step ** (j - 1)
    return out


def connection_matrix(A: OperatorFamily, N: int = 400) -> OperatorFamily:
    """S(u) = phi_+(u)^-1 phi_-(u) for step 1, returned as a family in z = exp(2 pi i u)."""
    plus = canonical_additive(A, 1.0, "+", N)
    minus = canonical_additive(A, 1.0, "-", N)

    def logs_u(u):
        return -plus.logs(u) + minus.logs(u)

    def logs_z(z):
        u = np.log(np.asarray(z, dtype=complex)) / (2j * np.pi)
        return logs_u(u)

    fam = OperatorFamily(A.dim, A.P, A.Pinv, logs_z, None, 0.0, None, None, True, {"N": N})
    fam.logs_u = logs_u  # type: ignore[attr-defined]
    return fam


def sine_ratio_channel(z: ZP) -> ZP:
    """prod_m f(u+m) for f = prod (u-a)/(u-b) as a rational function of z = exp(2 pi i u).

    sin pi(u-a)/sin pi(u-b) = e^{i pi (b-a)} (z - e^{2 pi i a})/(z - e^{2 pi i b}).
    """
    c = np.exp(1j * np.pi * (sum(z.poles) - sum(z.zeros)))
    return ZP(c, tuple(np.exp(2j * np.pi * a) for a in z.zeros), tuple(np.exp(2j * np.pi * b) for b in z.poles))


def direct_connection_product(A_eval: Callable[[complex], np.ndarray], u: complex, N: int = 2000) -> np.ndarray:
    """Doubly truncated ordered product A(u+N) ... A(u) ... A(u-N)."""
    out = np.eye(A_eval(u).shape[0], dtype=complex)
    for m in range(-N, N + 1):
        out = A_eval(u + m) @ out
    return out


def _log_series_matrix(coeffs: list[np.ndarray], K: int) -> list[np.ndarray]:
    """Matrix coefficients of log(1 + X(w)) for X = sum_{k>=1} coeffs[k] w^-k (commuting values)."""
    dim = coeffs[0].shape[0]
    X = [np.zeros((dim, dim), dtype=complex)] + [coeffs[k] if k < len(coeffs) else np.zeros((dim, dim), dtype=complex) for k in range(1, K + 1)]
    out = [np.zeros((dim, dim), dtype=complex) for _ in range(K + 1)]
    power = [np.eye(dim, dtype=complex)] + [np.zeros((dim, dim), dtype=complex)] * K
    for m in range(1, K + 1):
        new = [np.zeros((dim, dim), dtype=complex) for _ in range(K + 1)]
        for a in range(K + 1):
            if not power[a].any():
                continue
            for b in range(1, K + 1 - a):
                new[a + b] = new[a + b] + power[a] @ X[b]
        power = new
        for k in range(K + 1):
            out[k] = out[k] + (-1) ** (m + 1) / m * power[k]
    return out


def ordered_product_solution(A: RationalMatrixFunction, step: complex, side: str, N: int = 400, K: int = 20) -> Callable[[complex], np.ndarray]:
    """Fallback: ordered matrix product with a matrix-valued digamma/Hurwitz tail (no eigenbasis)."""
    step = complex(step)
    ser = A.series_at_infinity(K)
    if np.max(np.abs(ser[0] - np.eye(A.dim))) > 1e-12:
        raise ValueError("A must tend to 1 at infinity")
    L = _log_series_matrix(ser, K)
    A0 = L[1]
    sgn = 1 if side == "+" else -1

    def sol(s: complex) -> np.ndarray:
        s = complex(s)
        prod = np.eye(A.dim, dtype=complex)
        for n in range(1, N + 1):
            w = s + sgn * n * step
            prod = A.eval(w) @ expm(-sgn * A0 / (n * step)) @ prod
        x = sgn * s / step
        T = A0 / (sgn * step) * (psi(N + 1.0) - psi(N + 1.0 + x))
        for k in range(2, K + 1):
            T = T + L[k] * (sgn * step) ** (-k) * complex(hurwitz_zeta(k, N + 1.0 + x))
        prod = expm(T) @ prod
        g = expm(EULER_GAMMA * A0 / step)
        if side == "+":
            return np.linalg.inv(g @ A.eval(s) @ prod)
        return np.linalg.inv(g) @ prod

    return sol


def canonical_qdifference(A: OperatorFamily, p: complex, side: str, max_terms: int = 5000, eps: float = 1e-17) -> CanonicalSolution:
    """'+': prod_{n>=0} A(p^n z)^-1;  '-': prod_{n>=1} A(p^-n z).  Both solve sol(p z) = A(z) sol(z).

    A must be normalized to 1 at 0 and at infinity, and |p| != 1.
    """
    p = complex(p)
    if abs(abs(p) - 1.0) < 1e-12:
        raise ValueError("|q| = 1: multiplicative products do not converge")
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")

    def logs(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        total = np.zeros((len(z), A.dim), dtype=complex)
        n = 0 if side == "+" else 1
        sgn = -1 if side == "+" else 1
        e = 1 if side == "+" else -1
        count = 0
        while True:
            pts = z * p ** (e * n)
            term = A.logs(pts)
            total += sgn * term
            count += 1
            if np.max(np.abs(term)) < eps and count > 2:
                break
            if count > max_terms:
                raise DivergenceError("q-difference product did not converge")
            n += 1
        return total

    return CanonicalSolution(A.dim, A.P, A.Pinv, logs, None, 0.0, None, None, True, {"multiplier": p}, None, side, p, A)
