"""Finite-type Cartan data and exact inversion of the symmetrized T-Cartan matrix.

Laurent polynomials over the integers are stored as sparse ``{exponent: coeff}``
maps.  The inverse of ``B(T) = ([d_i a_ij]_T)`` is computed by fraction-free
Gauss-Jordan elimination, so every intermediate quantity stays in Z[T, T^-1].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "LaurentPolyZ",
    "CartanData",
    "GlobalParams",
    "CartanError",
    "t_number",
    "t_symmetric",
    "build_cartan",
    "invert_t_cartan",
    "fundamental_coweights_q",
    "omega_h_matrix",
    "QFraction",
    "SUPPORTED_TYPES",
    "iter_supported",
]


class CartanError(ValueError):
    """Unknown Cartan type, or an internal consistency failure during inversion."""


@dataclass(frozen=True)
class LaurentPolyZ:
    """Laurent polynomial in T with integer coefficients; zero coefficients are never stored."""

    coeffs: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(k): int(v) for k, v in dict(self.coeffs).items() if int(v) != 0}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def _trusted(cls, d: dict[int, int]) -> "LaurentPolyZ":
        # internal fast path: keys and values are already Python ints
        obj = object.__new__(cls)
        object.__setattr__(obj, "coeffs", {k: d[k] for k in sorted(d) if d[k]})
        return obj

    @classmethod
    def const(cls, c: int) -> "LaurentPolyZ":
        return cls({0: c})

    @classmethod
    def monomial(cls, exp: int, c: int = 1) -> "LaurentPolyZ":
        return cls({exp: c})

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPolyZ.const(other)
        if not isinstance(other, LaurentPolyZ):
            return NotImplemented
        return self.coeffs == other.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs

    def _coerce(self, other) -> "LaurentPolyZ":
        if isinstance(other, LaurentPolyZ):
            return other
        if isinstance(other, (int, np.integer)):
            return LaurentPolyZ.const(int(other))
        raise TypeError(f"cannot combine LaurentPolyZ with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return LaurentPolyZ._trusted(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolyZ._trusted({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return _ZERO
        out: dict[int, int] = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                out[k1 + k2] = out.get(k1 + k2, 0) + v1 * v2
        return LaurentPolyZ._trusted(out)

    __rmul__ = __mul__

    @property
    def min_exp(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    @property
    def max_exp(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def divmod(self, other: "LaurentPolyZ") -> tuple["LaurentPolyZ", "LaurentPolyZ"]:
        """Long division from the top degree; remainder has span shorter than the divisor.

        Quotient coefficients must be integers; otherwise CartanError is raised
        (a non-integral step means the division cannot be exact over Z).
        """
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if not self.coeffs:
            return _ZERO, _ZERO
        rem = dict(self.coeffs)
        quot: dict[int, int] = {}
        top_d, low_d = other.max_exp, other.min_exp
        lead = other.coeffs[top_d]
        span = top_d - low_d
        while rem:
            top = max(rem)
            if top - min(rem) < span:
                break
            c, r = divmod(rem[top], lead)
            if r:
                raise CartanError("non-integral quotient coefficient in Laurent division")
            shift = top - top_d
            quot[shift] = c
            for k, v in other.coeffs.items():
                key = k + shift
                nv = rem.get(key, 0) - c * v
                if nv:
                    rem[key] = nv
                else:
                    rem.pop(key, None)
        return LaurentPolyZ._trusted(quot), LaurentPolyZ._trusted(rem)

    def exact_div(self, other: "LaurentPolyZ") -> "LaurentPolyZ":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise CartanError(f"inexact Laurent division: {self} / {other}")
        return q

    def divides(self, other: "LaurentPolyZ") -> bool:
        """True iff self divides other in Z[T, T^-1]."""
        try:
            _, r = other.divmod(self)
        except CartanError:
            return False
        return r.is_zero()

    def reflect(self) -> "LaurentPolyZ":
        """p(T^-1)."""
        return LaurentPolyZ({-k: v for k, v in self.coeffs.items()})

    def is_palindromic(self) -> bool:
        return self == self.reflect()

    def substitute_power(self, a: int) -> "LaurentPolyZ":
        """p(T^a)."""
        return LaurentPolyZ({a * k: v for k, v in self.coeffs.items()})

    def __call__(self, t):
        return sum(v * t**k for k, v in self.coeffs.items()) if self.coeffs else 0 * t

    def at_one(self) -> int:
        return sum(self.coeffs.values())

    def to_json(self) -> dict[str, int]:
        return {str(k): v for k, v in self.coeffs.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, int]) -> "LaurentPolyZ":
        return cls({int(k): int(v) for k, v in data.items()})

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, v in sorted(self.coeffs.items(), reverse=True):
            mono = "" if k == 0 else ("T" if k == 1 else f"T^{k}")
            if mono and abs(v) == 1:
                term = ("-" if v < 0 else "") + mono
            else:
                term = f"{v}{'*' + mono if mono else ''}"
            parts.append(term)
        return " + ".join(parts).replace("+ -", "- ")


_ZERO = LaurentPolyZ._trusted({})


def t_number(n: int) -> LaurentPolyZ:
    """[n]_T = (T^n - T^-n)/(T - T^-1), extended oddly to negative n."""
    if n == 0:
        return LaurentPolyZ()
    if n < 0:
        return -t_number(-n)
    return LaurentPolyZ({n - 1 - 2 * i: 1 for i in range(n)})


def t_symmetric(m: int) -> LaurentPolyZ:
    """T^m + T^-m (equal to 2 at m = 0)."""
    return LaurentPolyZ({m: 1}) + LaurentPolyZ({-m: 1})


def _poly_matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum((a[i][t] * b[t][j] for t in range(k)), LaurentPolyZ()) for j in range(m)] for i in range(n)]


# (dual Coxeter number, multiplier m) as functions of the rank
_HDUAL = {
    "A": lambda n: (n + 1, 1),
    "B": lambda n: (2 * n - 1, 2),
    "C": lambda n: (n + 1, 2),
    "D": lambda n: (2 * n - 2, 1),
    "E": lambda n: ({6: 12, 7: 18, 8: 30}[n], 1),
    "F": lambda n: (9, 2),
    "G": lambda n: (4, 3),
}

_MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 4, "E": 6, "F": 4, "G": 2}
_MAX_RANK = {"A": 8, "B": 8, "C": 8, "D": 8, "E": 8, "F": 4, "G": 2}

SUPPORTED_TYPES: tuple[tuple[str, int], ...] = tuple(
    (t, n) for t in "ABCDEFG" for n in range(_MIN_RANK[t], _MAX_RANK[t] + 1)
)


def _dynkin(type_: str, n: int) -> tuple[list[int], list[tuple[int, int]]]:
    """Bourbaki-labelled symmetrizers (short roots d=1) and edges (0-based)."""
    chain = [(i, i + 1) for i in range(n - 1)]
    if type_ == "A":
        return [1] * n, chain
    if type_ == "B":
        return [2] * (n - 1) + [1], chain
    if type_ == "C":
        return [1] * (n - 1) + [2], chain
    if type_ == "D":
        return [1] * n, [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    if type_ == "E":
        edges = [(0, 2), (2, 3), (3, 4), (1, 3)] + [(k, k + 1) for k in range(4, n - 1)]
        return [1] * n, edges
    if type_ == "F":
        return [2, 2, 1, 1], chain
    if type_ == "G":
        return [1, 3], chain
    raise CartanError(f"unknown Cartan type {type_!r}")


@dataclass(frozen=True)
class CartanData:
    type: str
    rank: int
    A: np.ndarray
    d: tuple[int, ...]
    B: np.ndarray
    h_dual: int
    m: int
    l: int
    C: tuple[tuple[LaurentPolyZ, ...], ...]
    B_inv: np.ndarray

    @property
    def label(self) -> str:
        return f"{self.type}{self.rank}"

    def B_T(self) -> list[list[LaurentPolyZ]]:
        return [[t_number(int(b)) for b in row] for row in self.B]

    def c_coeff(self, i: int, j: int) -> dict[int, int]:
        """Exponent -> coefficient of C(T)_ij, i.e. the integers c_ij^(r)."""
        return dict(self.C[i][j].coeffs)


def build_cartan(type_: str, rank: int) -> CartanData:
    type_ = type_.upper()
    if type_ not in _HDUAL:
        raise CartanError(f"unknown Cartan type {type_!r}")
    if not (_MIN_RANK[type_] <= rank <= _MAX_RANK[type_]):
        raise CartanError(f"rank {rank} not supported for type {type_}")
    d, edges = _dynkin(type_, rank)
    B = np.zeros((rank, rank), dtype=int)
    for i in range(rank):
        B[i, i] = 2 * d[i]
    for i, j in edges:
        B[i, j] = B[j, i] = -max(d[i], d[j])
    A = B // np.array(d)[:, None]
    if not np.array_equal(A * np.array(d)[:, None], B):
        raise CartanError("symmetrizer does not divide the Gram matrix")
    h_dual, m = _HDUAL[type_](rank)
    cd = CartanData(type_, rank, A, tuple(d), B, h_dual, m, m * h_dual, (), np.linalg.inv(B))
    l, C = invert_t_cartan(cd)
    return CartanData(type_, rank, A, tuple(d), B, h_dual, m, l, C, cd.B_inv)


def _adjugate(M: list[list[LaurentPolyZ]]) -> tuple[LaurentPolyZ, list[list[LaurentPolyZ]]]:
    """Fraction-free Gauss-Jordan on [M | I]; returns (det M, adj M)."""
    n = len(M)
    W = [list(M[i]) + [LaurentPolyZ.const(int(i == j)) for j in range(n)] for i in range(n)]
    prev = LaurentPolyZ.const(1)
    sign = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if not W[r][k].is_zero()), None)
        if piv is None:
            return LaurentPolyZ(), [[LaurentPolyZ()] * n for _ in range(n)]
        if piv != k:
            W[k], W[piv] = W[piv], W[k]
            sign = -sign
        pk = W[k][k]
        for i in range(n):
            if i == k:
                continue
            f = W[i][k]
            if f.is_zero():
                W[i] = [(pk * x).exact_div(prev) for x in W[i]]
            else:
                W[i] = [(pk * W[i][j] - f * W[k][j]).exact_div(prev) for j in range(2 * n)]
        prev = pk
    # every row of the left block is now det*e_i; the right block is adj up to row sign
    det = prev
    adj = [[W[i][n + j] for j in range(n)] for i in range(n)]
    if sign < 0:
        det = -det
        adj = [[-x for x in row] for row in adj]
    return det, adj


def invert_t_cartan(cd: CartanData) -> tuple[int, tuple[tuple[LaurentPolyZ, ...], ...]]:
    """Return (l, C) with B(T) C(T) = [l]_T Id; l is the least such integer.

    l is found by scanning, then compared against m * h_dual; any mismatch,
    negative coefficient or failed identity raises CartanError.
    """
    BT = [[t_number(int(b)) for b in row] for row in cd.B]
    det, adj = _adjugate(BT)
    if det.is_zero():
        raise CartanError("singular T-Cartan matrix")
    n = cd.rank
    l_found = None
    entries = sorted((x for row in adj for x in row), key=lambda x: -len(x.coeffs))
    for l in range(1, 4 * cd.m * cd.h_dual + 2):
        # the sparsest entries fail fastest, so they screen candidates first
        if all(det.divides(t_number(l) * x) for x in reversed(entries)):
            l_found = l
            break
    if l_found is None or l_found != cd.m * cd.h_dual:
        raise CartanError(f"{cd.type}{n}: discovered l={l_found}, expected m * h_dual = {cd.m * cd.h_dual}")
    C = [[(t_number(l_found) * adj[i][j]).exact_div(det) for j in range(n)] for i in range(n)]
    prod = _poly_matmul(BT, C)
    for i in range(n):
        for j in range(n):
            expect = t_number(l_found) if i == j else LaurentPolyZ()
            if prod[i][j] != expect:
                raise CartanError(f"B(T)C(T) != [l]Id at ({i},{j})")
            if any(v < 0 for v in C[i][j].coeffs.values()):
                raise CartanError(f"negative coefficient in C(T)[{i}][{j}]")
    return l_found, tuple(tuple(row) for row in C)


@dataclass(frozen=True)
class QFraction:
    """num/den with Laurent polynomial numerator and denominator, compared by cross-multiplication."""

    num: LaurentPolyZ
    den: LaurentPolyZ

    def __eq__(self, other):
        if not isinstance(other, QFraction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __call__(self, t):
        return self.num(t) / self.den(t)


def fundamental_coweights_q(cd: CartanData) -> list[list[QFraction]]:
    """Row i lists the alpha_j coefficients of the i-th fundamental coweight.

    The pairing (coweight_i, alpha_j) = sum_k W_ik B(T)_kj is checked to equal
    delta_ij before returning.
    """
    n = cd.rank
    den = t_number(cd.l)
    W = [[QFraction(cd.C[i][j], den) for j in range(n)] for i in range(n)]
    BT = cd.B_T()
    for i in range(n):
        for j in range(n):
            pairing = sum((cd.C[i][k] * BT[k][j] for k in range(n)), LaurentPolyZ())
            if pairing != (den if i == j else LaurentPolyZ()):
                raise CartanError("coweight pairing is not the identity")
    return W


def omega_h_matrix(cd: CartanData) -> np.ndarray:
    """C(1)/l, which equals the numeric inverse of B."""
    W = np.array([[c.at_one() for c in row] for row in cd.C], dtype=float) / cd.l
    if not np.allclose(W, cd.B_inv, atol=1e-12, rtol=0):
        raise CartanError("C(1)/l disagrees with numeric inverse of B")
    return W


@dataclass(frozen=True)
class GlobalParams:
    """Deformation parameter and numeric defaults shared by every module."""

    hbar: complex = 0.2 + 0.3j
    tol: float = 1e-8
    seed: int = 20240531
    n_inner: int = 400
    n_outer: int = 400
    m_outer: int = 300

    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi * self.hbar)

    def q_i(self, d: int) -> complex:
        return cmath.exp(1j * math.pi * self.hbar * d)

    def hbar_irrational(self, max_den: int = 50, margin: float = 1e-9) -> bool:
        """Numerical stand-in for hbar not rational: nonzero imaginary part, or far from small-denominator fractions."""
        h = complex(self.hbar)
        if abs(h.imag) > margin:
            return True
        x = h.real
        return all(abs(x - round(x * k) / k) > margin for k in range(1, max_den + 1))

    def kd_ready(self) -> tuple[bool, str]:
        why = []
        if abs(abs(self.q) - 1.0) < 1e-9:
            why.append("|q| = 1")
        if not self.hbar_irrational():
            why.append("hbar is numerically rational")
        return not why, "; ".join(why)

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def to_json(self) -> dict:
        return {
            "hbar": [self.hbar.real, self.hbar.imag],
            "tol": self.tol,
            "seed": self.seed,
            "n_inner": self.n_inner,
            "n_outer": self.n_outer,
            "m_outer": self.m_outer,
        }


def iter_supported() -> Iterable[CartanData]:
    for t, n in SUPPORTED_TYPES:
        yield build_cartan(t, n)
