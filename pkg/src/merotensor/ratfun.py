"""Matrix-valued rational functions of one complex variable in partial-fraction form.

A function is stored as ``F(u) = C + sum_p sum_n N_{p,n} (u - p)^{-n}``.
Products, Kronecker products and inverses are rebuilt pole by pole from local
Laurent expansions, so no numerator/denominator pair is ever formed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import comb

__all__ = [
    "POLE_MERGE_TOL",
    "PoleProximityError",
    "NonCommutingError",
    "Pole",
    "RationalMatrixFunction",
    "ZP",
    "Contour",
    "Weight",
    "circle_quadrature",
    "contour_integral",
    "StarLog",
    "star_log",
    "log_derivative",
    "EigenData",
    "simultaneous_eigen",
    "fit_modes_rational",
]

POLE_MERGE_TOL = 1e-8
# principal parts smaller than this (relative to the function scale) are dropped
_TRIM_REL = 1e-13


class PoleProximityError(ValueError):
    """Evaluation requested at or numerically on top of a pole."""


class NonCommutingError(ValueError):
    """A family expected to commute does not."""


def _binom_neg(n: int, k: int) -> float:
    """binom(-n, k) = (-1)^k binom(n + k - 1, k)."""
    return (-1) ** k * comb(n + k - 1, k, exact=True)


@dataclass(frozen=True)
class Pole:
    loc: complex
    parts: tuple[np.ndarray, ...]

    @property
    def order(self) -> int:
        return len(self.parts)


def _as_matrix(x, shape=None) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if shape is not None and a.shape != shape:
        raise ValueError(f"shape mismatch {a.shape} vs {shape}")
    return a


def _merge_poles(poles: Iterable[tuple[complex, Sequence[np.ndarray]]], shape, scale: float) -> tuple[Pole, ...]:
    merged: list[list] = []
    for loc, parts in poles:
        loc = complex(loc)
        parts = [_as_matrix(p, shape) for p in parts]
        for entry in merged:
            if abs(entry[0] - loc) <= POLE_MERGE_TOL:
                acc = entry[1]
                for n, p in enumerate(parts):
                    if n < len(acc):
                        acc[n] = acc[n] + p
                    else:
                        acc.append(p.copy())
                break
        else:
            merged.append([loc, [p.copy() for p in parts]])
    out = []
    thresh = _TRIM_REL * max(scale, 1.0)
    for loc, parts in merged:
        while parts and np.max(np.abs(parts[-1]), initial=0.0) <= thresh:
            parts.pop()
        if parts:
            out.append(Pole(loc, tuple(parts)))
    out.sort(key=lambda p: (round(p.loc.real, 9), round(p.loc.imag, 9)))
    return tuple(out)


class RationalMatrixFunction:
    """Matrix-valued rational function, regular at infinity, in pole-centred form."""

    __slots__ = ("const", "poles")

    def __init__(self, const, poles: Iterable = ()):
        const = _as_matrix(const)
        plist = []
        scale = float(np.max(np.abs(const), initial=0.0))
        for p in poles:
            if isinstance(p, Pole):
                plist.append((p.loc, p.parts))
            else:
                plist.append((p[0], p[1]))
            for part in plist[-1][1]:
                scale = max(scale, float(np.max(np.abs(part), initial=0.0)))
        self.const = const
        self.poles = _merge_poles(plist, const.shape, scale)

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, M) -> "RationalMatrixFunction":
        return cls(M, ())

    @classmethod
    def identity(cls, dim: int) -> "RationalMatrixFunction":
        return cls(np.eye(dim, dtype=complex), ())

    @classmethod
    def zero(cls, dim: int) -> "RationalMatrixFunction":
        return cls(np.zeros((dim, dim), dtype=complex), ())

    @classmethod
    def simple_pole(cls, M, loc: complex, const=None) -> "RationalMatrixFunction":
        M = _as_matrix(M)
        c = np.zeros_like(M) if const is None else _as_matrix(const)
        return cls(c, [(loc, [M])])

    @classmethod
    def from_callable(
        cls,
        f: Callable[[complex], np.ndarray],
        pole_locs: Sequence[complex],
        const,
        max_order: int = 8,
        radii: Sequence[float] | None = None,
        tol: float = 1e-10,
    ) -> "RationalMatrixFunction":
        """Recover principal parts of a rational callable with known pole support.

        ``N_n = oint f(u) (u - p)^(n-1) du`` is computed by trapezoid quadrature
        on a circle around each pole; ``const`` is the value at infinity.
        """
        locs = [complex(p) for p in pole_locs]
        if radii is None:
            radii = _default_radii(locs)
        poles = []
        for p, r in zip(locs, radii):
            parts = []
            for n in range(1, max_order + 1):
                val, _, _ = circle_quadrature(lambda u, n=n: f(u) * (u - p) ** (n - 1), p, r, tol=tol)
                parts.append(val)
            poles.append((p, parts))
        return cls(const, poles)

    # basic properties -----------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.const.shape

    @property
    def dim(self) -> int:
        return self.const.shape[0]

    @property
    def pole_locs(self) -> list[complex]:
        return [p.loc for p in self.poles]

    def order_at(self, loc: complex) -> int:
        for p in self.poles:
            if abs(p.loc - loc) <= POLE_MERGE_TOL:
                return p.order
        return 0

    def scale(self) -> float:
        s = float(np.max(np.abs(self.const), initial=0.0))
        for p in self.poles:
            for part in p.parts:
                s = max(s, float(np.max(np.abs(part), initial=0.0)))
        return s

    # evaluation -----------------------------------------------------------
    def __call__(self, u):
        return self.eval(u)

    def eval(self, u, check: bool = True, margin: float = 1e-12):
        """Evaluate at a scalar (returns a matrix) or an array of points (returns a stack)."""
        scalar = np.ndim(u) == 0
        uu = np.atleast_1d(np.asarray(u, dtype=complex))
        out = np.broadcast_to(self.const, uu.shape + self.shape).copy()
        for p in self.poles:
            d = uu - p.loc
            if check and np.any(np.abs(d) <= margin):
                raise PoleProximityError(f"evaluation within {margin} of pole {p.loc}")
            inv = 1.0 / d
            powk = inv.copy()
            for part in p.parts:
                out += powk[..., None, None] * part
                powk = powk * inv
        return out[0] if scalar else out

    def value_at_infinity(self) -> np.ndarray:
        return self.const.copy()

    def laurent(self, c: complex, kmax: int) -> tuple[int, list[np.ndarray]]:
        """Local expansion at c: returns (k0, coeffs) with F = sum_k coeffs[k-k0] (u-c)^k, k0 <= k <= kmax."""
        own = None
        for p in self.poles:
            if abs(p.loc - c) <= POLE_MERGE_TOL:
                own = p
        k0 = -own.order if own is not None else 0
        coeffs = [np.zeros(self.shape, dtype=complex) for _ in range(k0, kmax + 1)]
        if own is not None:
            for n, part in enumerate(own.parts, start=1):
                coeffs[-n - k0] = coeffs[-n - k0] + part
        if kmax >= 0:
            coeffs[-k0] = coeffs[-k0] + self.const
            for p in self.poles:
                if p is own:
                    continue
                dc = c - p.loc
                for n, part in enumerate(p.parts, start=1):
                    for k in range(0, kmax + 1):
                        coeffs[k - k0] = coeffs[k - k0] + _binom_neg(n, k) * dc ** (-n - k) * part
        return k0, coeffs

    def taylor(self, c: complex, kmax: int) -> list[np.ndarray]:
        k0, co = self.laurent(c, kmax)
        if k0 < 0 and any(np.max(np.abs(x)) > 0 for x in co[: -k0]):
            raise PoleProximityError(f"Taylor expansion requested at pole {c}")
        return co[-k0:]

    # algebra --------------------------------------------------------------
    def _map_parts(self, f_const, f_part) -> "RationalMatrixFunction":
        return RationalMatrixFunction(f_const(self.const), [(p.loc, [f_part(x) for x in p.parts]) for p in self.poles])

    def __add__(self, other):
        if not isinstance(other, RationalMatrixFunction):
            other = RationalMatrixFunction.constant(np.asarray(other) * np.eye(self.dim) if np.ndim(other) == 0 else other)
        return RationalMatrixFunction(
            self.const + other.const, [(p.loc, p.parts) for p in self.poles] + [(p.loc, p.parts) for p in other.poles]
        )

    __radd__ = __add__

    def __neg__(self):
        return self._map_parts(lambda c: -c, lambda x: -x)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale_by(self, c: complex) -> "RationalMatrixFunction":
        return self._map_parts(lambda m: c * m, lambda x: c * x)

    def left(self, M) -> "RationalMatrixFunction":
        """M @ F."""
        M = _as_matrix(M)
        return self._map_parts(lambda c: M @ c, lambda x: M @ x)

    def right(self, M) -> "RationalMatrixFunction":
        """F @ M."""
        M = _as_matrix(M)
        return self._map_parts(lambda c: c @ M, lambda x: x @ M)

    def conjugate_by(self, P, Pinv=None) -> "RationalMatrixFunction":
        Pinv = np.linalg.inv(P) if Pinv is None else Pinv
        return self._map_parts(lambda c: Pinv @ c @ P, lambda x: Pinv @ x @ P)

    def transpose(self) -> "RationalMatrixFunction":
        return self._map_parts(lambda c: c.T, lambda x: x.T)

    def entry(self, i: int, j: int) -> "RationalMatrixFunction":
        return self._map_parts(lambda c: c[i : i + 1, j : j + 1], lambda x: x[i : i + 1, j : j + 1])

    def _bilinear(self, other: "RationalMatrixFunction", op) -> "RationalMatrixFunction":
        locs: list[complex] = []
        for p in list(self.poles) + list(other.poles):
            if all(abs(p.loc - q) > POLE_MERGE_TOL for q in locs):
                locs.append(p.loc)
        poles = []
        for c in locs:
            a, b = self.order_at(c), other.order_at(c)
            ka, fa = self.laurent(c, max(b - 1, 0))
            kb, gb = other.laurent(c, max(a - 1, 0))
            parts = []
            for m in range(1, a + b + 1):
                acc = None
                for i in range(ka, len(fa) + ka):
                    j = -m - i
                    if kb <= j < len(gb) + kb:
                        term = op(fa[i - ka], gb[j - kb])
                        acc = term if acc is None else acc + term
                parts.append(acc if acc is not None else op(fa[0], gb[0]) * 0)
            poles.append((c, parts))
        return RationalMatrixFunction(op(self.const, other.const), poles)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrixFunction):
            return self._bilinear(other, lambda x, y: x @ y)
        return self.right(other)

    def __rmatmul__(self, other):
        return self.left(other)

    def mul(self, other: "RationalMatrixFunction") -> "RationalMatrixFunction":
        return self @ other

    def kron(self, other: "RationalMatrixFunction") -> "RationalMatrixFunction":
        return self._bilinear(other, np.kron)

    def shift(self, a: complex) -> "RationalMatrixFunction":
        """u -> F(u - a): every pole moves by +a."""
        return RationalMatrixFunction(self.const, [(p.loc + a, p.parts) for p in self.poles])

    def rescale(self, zeta: complex) -> "RationalMatrixFunction":
        """z -> F(z / zeta): poles p move to zeta*p and N_n picks up zeta^n."""
        return RationalMatrixFunction(
            self.const, [(zeta * p.loc, [zeta ** n * x for n, x in enumerate(p.parts, start=1)]) for p in self.poles]
        )

    def derivative(self) -> "RationalMatrixFunction":
        poles = []
        for p in self.poles:
            parts = [np.zeros(self.shape, dtype=complex)] + [-n * x for n, x in enumerate(p.parts, start=1)]
            poles.append((p.loc, parts))
        return RationalMatrixFunction(np.zeros(self.shape, dtype=complex), poles)

    def value_at_zero_shifted(self) -> np.ndarray:
        return self.eval(0.0)

    def series_at_infinity(self, kmax: int) -> list[np.ndarray]:
        """Coefficients a_k of F(u) = sum_k a_k u^(-k), k = 0..kmax."""
        out = [self.const.copy()] + [np.zeros(self.shape, dtype=complex) for _ in range(kmax)]
        for p in self.poles:
            for n, part in enumerate(p.parts, start=1):
                # (u-p)^-n = sum_{k>=n} binom(k-1, n-1) p^(k-n) u^-k
                for k in range(n, kmax + 1):
                    out[k] = out[k] + comb(k - 1, n - 1, exact=True) * p.loc ** (k - n) * part
        return out

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        def offdiag(m):
            return float(np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0))

        s = max(self.scale(), 1.0)
        return offdiag(self.const) <= tol * s and all(offdiag(x) <= tol * s for p in self.poles for x in p.parts)

    def inverse(self, max_order: int | None = None) -> "RationalMatrixFunction":
        """F(u)^-1 as a rational function; poles located from the zeros of det F."""
        Cinv = np.linalg.inv(self.const)
        if self.is_diagonal():
            chans = [self.diagonal_channel(k).inverse() for k in range(self.dim)]
            return RationalMatrixFunction.from_diagonal(chans)
        roots = self.det_zeros()
        clusters = _cluster(roots, 1e-5)
        if not clusters:
            return RationalMatrixFunction.constant(Cinv)
        locs = [c for c, _ in clusters]
        avoid = locs + self.pole_locs
        radii = [min(0.25, 0.5 * min([abs(c - o) for o in avoid if abs(c - o) > 1e-5], default=0.5)) for c in locs]
        mo = max_order if max_order is not None else max(m for _, m in clusters) + 1
        inv = lambda u: np.linalg.inv(self.eval(u))  # noqa: E731
        return RationalMatrixFunction.from_callable(inv, locs, Cinv, max_order=mo, radii=radii)

    def det_zeros(self) -> np.ndarray:
        """Zeros of det F(u), via the polynomial det(q(u) F(u)) with q the pole polynomial."""
        qroots = [p.loc for p in self.poles for _ in range(p.order)]
        deg = self.dim * len(qroots)
        if deg == 0:
            return np.zeros(0, dtype=complex)
        center = np.mean(qroots)
        rad = 1.5 * max(1.0, max(abs(r - center) for r in qroots))
        npts = deg + 1
        ws = center + rad * np.exp(2j * np.pi * (np.arange(npts) + 0.5) / npts)
        vals = np.array([np.linalg.det(self.eval(w) * np.prod([(w - r) for r in qroots])) for w in ws])
        # interpolate in the scaled variable t = (u - center)/rad, then map roots back
        V = np.vander((ws - center) / rad, npts, increasing=True)
        coef = np.linalg.solve(V, vals)
        lead = np.max(np.abs(coef))
        nz = np.nonzero(np.abs(coef) > 1e-11 * lead)[0]
        if len(nz) == 0:
            return np.zeros(0, dtype=complex)
        coef = coef[: nz[-1] + 1]
        r = np.roots(coef[::-1]) if len(coef) > 1 else np.zeros(0)
        return center + rad * r

    def diagonal_channel(self, k: int) -> "ZP":
        return ZP.from_rational(self.entry(k, k))

    @classmethod
    def from_diagonal(cls, chans: Sequence["RationalMatrixFunction | ZP"]) -> "RationalMatrixFunction":
        n = len(chans)
        out = None
        for k, ch in enumerate(chans):
            r = ch.to_rational() if isinstance(ch, ZP) else ch
            E = np.zeros((n, n), dtype=complex)
            E[k, k] = 1
            term = RationalMatrixFunction(
                r.const[0, 0] * E, [(p.loc, [x[0, 0] * E for x in p.parts]) for p in r.poles]
            )
            out = term if out is None else out + term
        return out

    def max_abs_diff(self, other: "RationalMatrixFunction", samples: np.ndarray) -> float:
        return float(np.max(np.abs(self.eval(samples) - other.eval(samples))))

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "const": _mat_json(self.const),
            "poles": [{"loc": [p.loc.real, p.loc.imag], "parts": [_mat_json(x) for x in p.parts]} for p in self.poles],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RationalMatrixFunction":
        return cls(
            _mat_from_json(data["const"]),
            [(complex(*p["loc"]), [_mat_from_json(x) for x in p["parts"]]) for p in data["poles"]],
        )

    def __repr__(self):
        return f"RationalMatrixFunction(dim={self.dim}, poles={[(p.loc, p.order) for p in self.poles]})"


def _mat_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def _mat_from_json(rows) -> np.ndarray:
    return np.array([[complex(*x) for x in row] for row in rows], dtype=complex)


def _cluster(points: Iterable[complex], tol: float) -> list[tuple[complex, int]]:
    groups: list[list[complex]] = []
    for z in points:
        for g in groups:
            if abs(g[0] - z) < tol:
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def _default_radii(locs: Sequence[complex], avoid: Sequence[complex] = (), cap: float = 0.25) -> list[float]:
    out = []
    for i, p in enumerate(locs):
        others = [abs(p - q) for j, q in enumerate(locs) if j != i] + [abs(p - q) for q in avoid]
        others = [d for d in others if d > 0]
        out.append(min(cap, 0.5 * min(others)) if others else cap)
    return out


# ---------------------------------------------------------------------------
# scalar rational functions in zero/pole form


def _series_linear_product(shifts: Sequence[complex], K: int) -> np.ndarray:
    """Taylor coefficients in t of prod (t + c) up to t^K."""
    out = np.zeros(K + 1, dtype=complex)
    out[0] = 1.0
    for c in shifts:
        new = c * out
        new[1:] += out[:-1]
        out = new
    return out


def _series_inverse_linear_product(shifts: Sequence[complex], K: int) -> np.ndarray:
    """Taylor coefficients of prod 1/(t + d) up to t^K (all d nonzero)."""
    out = np.zeros(K + 1, dtype=complex)
    out[0] = 1.0
    for d in shifts:
        geo = np.array([(-1) ** k / d ** (k + 1) for k in range(K + 1)], dtype=complex)
        out = np.convolve(out, geo)[: K + 1]
    return out


@dataclass(frozen=True)
class ZP:
    """Scalar rational function c * prod(u - z) / prod(u - p), kept in exact zero/pole form."""

    c: complex = 1.0
    zeros: tuple[complex, ...] = ()
    poles: tuple[complex, ...] = ()

    def __post_init__(self):
        z = [complex(x) for x in self.zeros]
        p = [complex(x) for x in self.poles]
        # cancel coincident zero/pole pairs
        keep_p = []
        for x in p:
            for k, y in enumerate(z):
                if abs(x - y) <= 1e-12 * max(1.0, abs(x)):
                    z.pop(k)
                    break
            else:
                keep_p.append(x)
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "zeros", tuple(z))
        object.__setattr__(self, "poles", tuple(keep_p))

    @property
    def degree_gap(self) -> int:
        return len(self.zeros) - len(self.poles)

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        out = np.full(u.shape, self.c, dtype=complex)
        for z in self.zeros:
            out = out * (u - z)
        for p in self.poles:
            out = out / (u - p)
        return out if out.ndim else complex(out)

    def log_at(self, u):
        """Sum of log(1 - z/u) - log(1 - p/u) plus log c (principal branches, star cuts [0, z])."""
        u = np.asarray(u, dtype=complex)
        if self.degree_gap != 0:
            raise ValueError("log_at requires equal numbers of zeros and poles")
        out = np.full(u.shape, cmath.log(self.c) if self.c != 1 else 0.0, dtype=complex)
        for z in self.zeros:
            out = out + np.log1p(-z / u)
        for p in self.poles:
            out = out - np.log1p(-p / u)
        return out if out.ndim else complex(out)

    def log_at_zero_normalized(self, w):
        """Sum of log(1 - w/z) - log(1 - w/p); star cuts are the rays [z, infinity)."""
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape, dtype=complex)
        for z in self.zeros:
            out = out + np.log1p(-w / z)
        for p in self.poles:
            out = out - np.log1p(-w / p)
        return out if out.ndim else complex(out)

    def __mul__(self, other):
        if isinstance(other, ZP):
            return ZP(self.c * other.c, self.zeros + other.zeros, self.poles + other.poles)
        return ZP(self.c * other, self.zeros, self.poles)

    __rmul__ = __mul__

    def __truediv__(self, other: "ZP"):
        return self * other.inverse()

    def inverse(self) -> "ZP":
        return ZP(1.0 / self.c, self.poles, self.zeros)

    def power(self, k: int) -> "ZP":
        if k < 0:
            return self.inverse().power(-k)
        return ZP(self.c**k, self.zeros * k, self.poles * k)

    def shift(self, a: complex) -> "ZP":
        """u -> f(u - a)."""
        return ZP(self.c, tuple(z + a for z in self.zeros), tuple(p + a for p in self.poles))

    def rescale(self, zeta: complex) -> "ZP":
        """z -> f(z / zeta)."""
        k = self.degree_gap
        return ZP(self.c * zeta ** (-k), tuple(zeta * z for z in self.zeros), tuple(zeta * p for p in self.poles))

    def at_infinity(self) -> complex:
        if self.degree_gap > 0:
            return complex("inf")
        return self.c if self.degree_gap == 0 else 0.0

    def log_series_coeffs(self, P: int) -> np.ndarray:
        """e_p (p = 0..P) with log(f(w)/c) = sum_{p>=1} e_p w^-p at large w (equal degrees)."""
        e = np.zeros(P + 1, dtype=complex)
        pw = np.arange(1, P + 1)
        for z in self.zeros:
            e[1:] -= z**pw / pw
        for p in self.poles:
            e[1:] += p**pw / pw
        return e

    def to_rational(self) -> RationalMatrixFunction:
        if self.degree_gap > 0:
            raise ValueError("not regular at infinity")
        groups = _cluster(self.poles, 1e-12)
        poles = []
        for loc, m in groups:
            others = [p for p in self.poles if abs(p - loc) >= 1e-12]
            K = m - 1
            num = _series_linear_product([loc - z for z in self.zeros], K)
            den = _series_inverse_linear_product([loc - p for p in others], K)
            h = self.c * np.convolve(num, den)[: K + 1]
            # f = h(t) t^-m, so N_n = h_{m-n}
            poles.append((loc, [h[m - n] for n in range(1, m + 1)]))
        return RationalMatrixFunction(np.array([[self.at_infinity()]]), [(l, [np.array([[x]]) for x in parts]) for l, parts in poles])

    @classmethod
    def from_rational(cls, F: RationalMatrixFunction) -> "ZP":
        """Zero/pole form of a 1x1 rational function; zeros from numpy polynomial roots."""
        if F.shape != (1, 1):
            raise ValueError("ZP.from_rational needs a scalar function")
        qlist = [p.loc for p in F.poles for _ in range(p.order)]

        def poly_from_roots(roots):
            out = np.poly1d([1.0 + 0j])
            for r in roots:
                out = out * np.poly1d([1.0, -r])
            return out

        poly = complex(F.const[0, 0]) * poly_from_roots(qlist)
        for p in F.poles:
            others = [r for q in F.poles if q is not p for r in [q.loc] * q.order]
            for n, part in enumerate(p.parts, start=1):
                # q(u) / (u - p)^n
                poly = poly + complex(part[0, 0]) * poly_from_roots(others + [p.loc] * (p.order - n))
        coeffs = np.trim_zeros(np.asarray(poly.coeffs, dtype=complex), "f")
        scale = max(np.max(np.abs(coeffs)), 1e-300) if len(coeffs) else 1.0
        while len(coeffs) and abs(coeffs[0]) <= 1e-13 * scale:
            coeffs = coeffs[1:]
        if len(coeffs) == 0:
            return cls(0.0, (), ())
        zeros = tuple(np.roots(coeffs)) if len(coeffs) > 1 else ()
        return cls(coeffs[0], zeros, tuple(qlist))


# ---------------------------------------------------------------------------
# contour integration


@dataclass(frozen=True)
class Contour:
    """Union of small circles around the enclosed poles (orientation counter-clockwise)."""

    enclosed: tuple[complex, ...]
    radii: tuple[float, ...] | None = None

    @classmethod
    def around(cls, enclosed: Sequence[complex], avoid: Sequence[complex] = (), cap: float = 0.25) -> "Contour":
        enclosed = tuple(complex(p) for p in enclosed)
        return cls(enclosed, tuple(_default_radii(enclosed, avoid, cap)))

    def circles(self) -> list[tuple[complex, float]]:
        radii = self.radii if self.radii is not None else _default_radii(self.enclosed)
        return list(zip(self.enclosed, radii))


@dataclass
class Weight:
    """Holomorphic weight w(u); ``taylor(p, K)`` returns its first K+1 Taylor coefficients at p when known."""

    func: Callable
    taylor: Callable[[complex, int], Sequence] | None = None

    def __call__(self, u):
        return self.func(u)

    @classmethod
    def power(cls, r: int) -> "Weight":
        def tay(p, K):
            return [_gbinom(r, k) * p ** (r - k) for k in range(K + 1)]

        return cls(lambda u: np.asarray(u, dtype=complex) ** r, tay)

    @classmethod
    def exponential(cls, alpha: complex) -> "Weight":
        """e^(alpha u)."""

        def tay(p, K):
            e = cmath.exp(alpha * p)
            return [e * alpha**k / math.factorial(k) for k in range(K + 1)]

        return cls(lambda u: np.exp(alpha * np.asarray(u, dtype=complex)), tay)

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> "Weight":
        """sum coeffs[k] u^k."""
        P = np.polynomial.Polynomial(np.asarray(coeffs, dtype=complex))

        def tay(p, K):
            out, D = [], P
            for k in range(K + 1):
                out.append(D(p) / math.factorial(k))
                D = D.deriv()
            return out

        return cls(lambda u: P(np.asarray(u, dtype=complex)), tay)


def circle_quadrature(
    f: Callable, center: complex, radius: float, tol: float = 1e-10, n0: int = 64, nmax: int = 1024
) -> tuple[np.ndarray, int, bool]:
    """(1/2 pi i) times the integral of f over a circle, by the trapezoid rule with point doubling.

    ``f`` may be vectorized (array in, stacked values out); otherwise it is mapped pointwise.
    Returns (value, points used, converged).
    """

    def estimate(n):
        th = 2 * np.pi * np.arange(n) / n
        e = np.exp(1j * th)
        u = center + radius * e
        try:
            vals = np.asarray(f(u))
            if vals.shape[:1] != (n,):
                raise ValueError
        except Exception:
            vals = np.array([np.asarray(f(x)) for x in u])
        w = (radius * e).reshape((n,) + (1,) * (vals.ndim - 1))
        return np.mean(vals * w, axis=0)

    n = n0
    prev = estimate(n)
    while n < nmax:
        n *= 2
        cur = estimate(n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur, n, True
        prev = cur
    return prev, n, False


def contour_integral(F: RationalMatrixFunction, C: Contour, weight: Weight | Callable | None = None, method: str = "auto"):
    """oint weight(u) F(u) du over the circles of C (the 1/(2 pi i) factor included).

    With a weight carrying Taylor data (or no weight) the residue formula is
    exact; otherwise, or when method == "quadrature", trapezoid quadrature is used.
    """
    if weight is None:
        weight = Weight(lambda u: np.ones_like(np.asarray(u, dtype=complex)), lambda p, K: [1.0] + [0.0] * K)
    if not isinstance(weight, Weight):
        weight = Weight(weight)
    use_residues = method == "residue" or (method == "auto" and weight.taylor is not None)
    out = np.zeros(F.shape, dtype=complex)
    if use_residues:
        if weight.taylor is None:
            raise ValueError("residue method needs Taylor data for the weight")
        for loc in C.enclosed:
            for p in F.poles:
                if abs(p.loc - loc) <= POLE_MERGE_TOL:
                    tay = weight.taylor(p.loc, p.order - 1)
                    for n, part in enumerate(p.parts, start=1):
                        out = out + np.asarray(tay[n - 1]) * part if np.ndim(tay[n - 1]) == 0 else out + np.asarray(tay[n - 1]) @ part
        return out
    for center, r in C.circles():
        def integrand(u):
            w = np.asarray(weight(u))
            v = F.eval(u)
            if w.ndim <= 1:
                return w.reshape(w.shape + (1, 1)) * v if w.ndim == 1 else w * v
            return w @ v

        val, _, _ = circle_quadrature(integrand, center, r)
        out = out + val
    return out


# ---------------------------------------------------------------------------
# commuting families: shared eigenbasis and star-cut logarithms


@dataclass
class EigenData:
    """Shared eigenbasis P (columns) of a commuting family with per-channel scalar data.

    ``channels[m][e]`` is the ZP eigenvalue of family member m on basis vector e.
    For a non-semisimple family, ``blocks`` lists index groups (generalized
    eigenspaces) and ``channels`` holds the block eigenvalue tr(block)/size.
    """

    P: np.ndarray
    Pinv: np.ndarray
    channels: list[list[ZP]]
    blocks: list[list[int]]
    semisimple: bool

    @property
    def dim(self) -> int:
        return self.P.shape[0]


def _check_commuting(family: Sequence[RationalMatrixFunction], pts: np.ndarray, tol: float) -> None:
    vals = [F.eval(pts, check=False) for F in family]
    worst = 0.0
    for a in vals:
        for b in vals:
            # every member at every sample against every other at every sample
            ab = np.einsum("iab,jbc->ijac", a, b)
            ba = np.einsum("jab,ibc->ijac", b, a)
            worst = max(worst, float(np.max(np.abs(ab - ba))))
    scale = max(1.0, max(float(np.max(np.abs(v))) for v in vals))
    if worst > tol * scale:
        raise NonCommutingError(f"family does not commute (defect {worst:.3e})")


def simultaneous_eigen(family: Sequence[RationalMatrixFunction], seed: int = 7, tol: float = 1e-9) -> EigenData:
    family = list(family)
    dim = family[0].dim
    rng = np.random.default_rng(seed)
    locs = [p for F in family for p in F.pole_locs]
    R = 2.0 * max([1.0] + [abs(p) for p in locs])
    pts = R * (1.5 + rng.random(6)) * np.exp(2j * np.pi * rng.random(6))
    _check_commuting(family, pts, tol)
    if all(F.is_diagonal() for F in family):
        I = np.eye(dim, dtype=complex)
        chans = [[F.diagonal_channel(e) for e in range(dim)] for F in family]
        return EigenData(I, I.copy(), chans, [[e] for e in range(dim)], True)
    coefs = rng.normal(size=(len(family), len(pts))) + 1j * rng.normal(size=(len(family), len(pts)))
    M = sum(coefs[m, k] * family[m].eval(pts[k], check=False) for m in range(len(family)) for k in range(len(pts)))
    w, V = np.linalg.eig(M)
    # group numerically equal eigenvalues into generalized eigenspaces
    groups = _cluster(list(w), 1e-7 * max(1.0, float(np.max(np.abs(w)))))
    blocks: list[list[int]] = []
    for g, _ in groups:
        blocks.append([k for k in range(dim) if abs(w[k] - g) < 1e-7 * max(1.0, float(np.max(np.abs(w))))])
    semisimple = np.linalg.cond(V) < 1e8
    if semisimple:
        P = V
        Pinv = np.linalg.inv(P)
        conj = [F.conjugate_by(P, Pinv) for F in family]
        if all(F.is_diagonal(tol=1e-9) for F in conj):
            chans = [[ZP.from_rational(F.entry(e, e)) for e in range(dim)] for F in conj]
            return EigenData(P, Pinv, chans, [[e] for e in range(dim)], True)
    # non-semisimple: Schur-type basis adapted to generalized eigenspaces
    cols, blocks2 = [], []
    start = 0
    for g, m in groups:
        Nrm = M - g * np.eye(dim)
        _, s, vh = np.linalg.svd(np.linalg.matrix_power(Nrm, dim))
        basis = vh.conj().T[:, dim - m :]
        cols.append(basis)
        blocks2.append(list(range(start, start + m)))
        start += m
    P = np.hstack(cols)
    Pinv = np.linalg.inv(P)
    conj = [F.conjugate_by(P, Pinv) for F in family]
    chans = []
    for F in conj:
        row = []
        for blk in blocks2:
            tr = None
            for e in blk:
                t = F.entry(e, e)
                tr = t if tr is None else tr + t
            z = ZP.from_rational(tr.scale_by(1.0 / len(blk)))
            row.extend([z] * len(blk))
        chans.append(row)
    return EigenData(P, Pinv, chans, blocks2, False)


class StarLog:
    """Single-valued logarithm t(u) of a commuting family member with star-shaped cuts.

    additive: t(u) = sum log(1 - a/u) - log(1 - b/u), t(infinity) = 0.
    trigonometric: H(w) = sum log(1 - w/a) - log(1 - w/b), H(0) = 0.
    """

    def __init__(self, source: RationalMatrixFunction, variant: str, eig: EigenData, index: int = 0):
        if variant not in ("additive", "trigonometric"):
            raise ValueError(f"unknown variant {variant!r}")
        self.source = source
        self.variant = variant
        self.eig = eig
        self.index = index
        self.channels = eig.channels[index]
        self.perturbations: list[tuple[complex, complex]] = []

    def cut_points(self) -> list[complex]:
        pts = []
        for ch in self.channels:
            pts += list(ch.zeros) + list(ch.poles)
        return pts

    def _on_cut(self, u: complex) -> bool:
        for a in self.cut_points():
            if self.variant == "additive":
                # segment [0, a]
                if abs(a) == 0:
                    continue
                t = u / a
                if abs(t.imag) < 1e-13 and -1e-13 <= t.real <= 1 + 1e-13:
                    return True
            else:
                t = u / a
                if abs(t.imag) < 1e-13 and t.real >= 1 - 1e-13:
                    return True
        return False

    def _scalar_logs(self, u: complex) -> np.ndarray:
        if self.variant == "additive":
            return np.array([ch.log_at(u) for ch in self.channels])
        return np.array([ch.log_at_zero_normalized(u) for ch in self.channels])

    def __call__(self, u: complex) -> np.ndarray:
        u = complex(u)
        if self._on_cut(u):
            v = u + 1e-12 * (1 + 1j)
            self.perturbations.append((u, v))
            u = v
        logs = self._scalar_logs(u)
        D = np.diag(logs)
        if not self.eig.semisimple:
            Fc = self.eig.Pinv @ self.source.eval(u) @ self.eig.P
            for blk in self.eig.blocks:
                if len(blk) == 1:
                    continue
                sub = Fc[np.ix_(blk, blk)]
                lam = self.channels[blk[0]](u)
                N = sub / lam - np.eye(len(blk))
                L = np.zeros_like(N)
                Nk = np.eye(len(blk), dtype=complex)
                for k in range(1, len(blk)):
                    Nk = Nk @ N
                    L = L + (-1) ** (k + 1) * Nk / k
                D[np.ix_(blk, blk)] = D[np.ix_(blk, blk)] + L
        return self.eig.P @ D @ self.eig.Pinv


def star_log(F: RationalMatrixFunction, variant: str = "additive", family: Sequence[RationalMatrixFunction] | None = None) -> StarLog:
    fam = [F] + [G for G in (family or []) if G is not F]
    eig = simultaneous_eigen(fam)
    if variant == "additive":
        ref = F.const
    else:
        ref = F.eval(0.0)
    if np.max(np.abs(ref - np.eye(F.dim))) > 1e-9:
        raise ValueError(f"{variant} star log needs F normalized to 1 at {'infinity' if variant == 'additive' else '0'}")
    return StarLog(F, variant, eig, 0)


def log_derivative(F: RationalMatrixFunction) -> RationalMatrixFunction:
    """F(u)^-1 F'(u) as a rational function."""
    if all(np.max(np.abs(x)) == 0 for p in F.poles for x in p.parts):
        return RationalMatrixFunction.zero(F.dim)
    if F.is_diagonal():
        chans = []
        for e in range(F.dim):
            z = F.diagonal_channel(e)
            poles = [(a, [np.array([[1.0]])]) for a in z.zeros] + [(b, [np.array([[-1.0]])]) for b in z.poles]
            chans.append(RationalMatrixFunction(np.zeros((1, 1)), poles))
        return RationalMatrixFunction.from_diagonal(chans)
    return F.inverse() @ F.derivative()


# ---------------------------------------------------------------------------
# rational reconstruction from a window of contour modes


def fit_modes_rational(
    modes: dict[int, np.ndarray], pole_orders: Sequence[tuple[complex, int]], guard: Sequence[int] = ()
) -> tuple[RationalMatrixFunction, float]:
    """Reconstruct X(z) = C + sum N_{j,n} (z - w_j)^-n from X_k = oint X(z) z^(k-1) dz.

    The contour encloses every w_j but not 0, so X_k = sum N_{j,n} binom(k-1, n-1) w_j^(k-n).
    C is fixed by X(0) = 0.  Modes with k in ``guard`` are held out; their misfit,
    relative to the size of the corresponding row, is the validation residual.
    """
    ks = sorted(k for k in modes if k not in guard)
    cols = [(w, n) for w, m in pole_orders for n in range(1, m + 1)]
    shape = next(iter(modes.values())).shape

    def row(k):
        return np.array([_gbinom(k - 1, n - 1) * w ** (k - n) for (w, n) in cols], dtype=complex)

    def row_scale(r):
        m = float(np.max(np.abs(r)))
        return m if m > 0 else 1.0

    A = np.array([row(k) for k in ks])
    Y = np.array([modes[k].reshape(-1) for k in ks])
    # rows and columns both scaled: |w|^k spans decades when |w| is far from 1
    rs = np.array([row_scale(r) for r in A])
    A, Y = A / rs[:, None], Y / rs[:, None]
    sc = np.max(np.abs(A), axis=0)
    sc[sc == 0] = 1.0
    sol, *_ = np.linalg.lstsq(A / sc, Y, rcond=None)
    sol = sol / sc[:, None]
    parts: dict[complex, list] = {}
    for (w, n), r in zip(cols, sol):
        parts.setdefault(w, []).append(r.reshape(shape))
    const = np.zeros(shape, dtype=complex)
    for (w, n), r in zip(cols, sol):
        const = const - r.reshape(shape) * (-w) ** (-n)
    F = RationalMatrixFunction(const, [(w, p) for w, p in parts.items()])
    size = max(1.0, float(np.max(np.abs(sol)))) if len(sol) else 1.0
    resid = 0.0
    for k in guard:
        r = row(k)
        pred = (r @ sol).reshape(shape)
        resid = max(resid, float(np.max(np.abs(pred - modes[k]))) / (row_scale(r) * size))
    return F, resid


def _gbinom(a: int, b: int) -> float:
    """binom(a, b) for integer a (possibly negative) and b >= 0."""
    if b < 0:
        return 0.0
    out = 1.0
    for i in range(b):
        out *= (a - i) / (i + 1)
    return out
