"""Deformed Drinfeld tensor products of Yangian and quantum-loop representations.

The contour integrals in the coproduct formulas are finite residue sums.  For a
pole p of order m of the integrated field, with principal parts N_1..N_m, and a
holomorphic factor h(v) = sum_k h_k (v - p)^k, expanding the Cauchy kernel

    1/(u - v) = sum_a (v - p)^a / (u - p)^(a+1)

gives the residue sum_n sum_{a+k=n-1} h_k N_n / (u - p)^(a+1).  The output
fields are therefore assembled directly in partial-fraction form.
"""

from __future__ import annotations

import numpy as np

from .ratfun import RationalMatrixFunction
from .yangian_rep import YangianRep, shift, verify_relations

__all__ = [
    "PoleCollisionError",
    "POLE_SEPARATION",
    "ytensor",
    "qtensor",
    "check_associativity",
    "check_associativity_q",
]

POLE_SEPARATION = 1e-6


class PoleCollisionError(ValueError):
    """Pole sets of the two factors are not separated as the contour formulas require."""


def _kernel_residues(
    integrand: RationalMatrixFunction,
    holo: RationalMatrixFunction,
    holo_left: bool,
    const_kernel: bool = False,
) -> tuple[np.ndarray, list]:
    """Partial fractions of u -> sum_p Res_{v=p} K(u, v) [holo(v) (x) integrand(v)].

    K is 1/(u - v), or u/(v (u - v)) = 1/(u - v) + 1/v when ``const_kernel``.
    ``holo_left`` places the holomorphic factor in the first tensor leg.
    """
    shape = np.kron(holo.const, integrand.const).shape
    const = np.zeros(shape, dtype=complex)
    poles = []
    for p in integrand.poles:
        m = p.order
        h = holo.taylor(p.loc, m - 1)
        M = []
        for a in range(m):
            acc = np.zeros(shape, dtype=complex)
            for n in range(a + 1, m + 1):
                hk = h[n - 1 - a]
                acc = acc + (np.kron(hk, p.parts[n - 1]) if holo_left else np.kron(p.parts[n - 1], hk))
            M.append(acc)
            if const_kernel:
                const = const + (-1) ** a * p.loc ** (-a - 1) * acc
        poles.append((p.loc, M))
    return const, poles


def _check_separation(left: list[complex], right: list[complex], what: str) -> float:
    gap = min([abs(a - b) for a in left for b in right], default=np.inf)
    if gap <= POLE_SEPARATION:
        raise PoleCollisionError(f"{what}: pole sets collide (min distance {gap:.3e})")
    return gap


def ytensor(V1: YangianRep, V2: YangianRep, s: complex, check: bool = False) -> YangianRep:
    """V1 (x)_s V2 on the tensor space V1 (x) V2 (first factor is the slow index)."""
    if V1.cartan.type != V2.cartan.type or V1.cartan.rank != V2.cartan.rank:
        raise ValueError("factors belong to different Yangians")
    _check_separation([p + s for p in V1.sigma()], V2.sigma(), "ytensor")
    n1, n2 = V1.dim, V2.dim
    I1 = RationalMatrixFunction.identity(n1)
    I2 = RationalMatrixFunction.identity(n2)
    xi, xp, xm = [], [], []
    for i in range(V1.rank):
        xi1 = V1.xi[i].shift(s)
        xi.append(xi1.kron(V2.xi[i]))
        c, poles = _kernel_residues(V2.xp[i], xi1, holo_left=True)
        xp.append(V1.xp[i].shift(s).kron(I2) + RationalMatrixFunction(c, poles))
        c, poles = _kernel_residues(V1.xm[i].shift(s), V2.xi[i], holo_left=False)
        xm.append(RationalMatrixFunction(c, poles) + I1.kron(V2.xm[i]))
    chans = None
    if V1.xi_channels is not None and V2.xi_channels is not None:
        chans = tuple(
            tuple(a.shift(s) * b for a in V1.xi_channels[i] for b in V2.xi_channels[i]) for i in range(V1.rank)
        )
    out = YangianRep(V1.cartan, V1.params, n1 * n2, tuple(xi), tuple(xp), tuple(xm), chans, "tensor")
    if check:
        rep = verify_relations(out)
        if not rep.passed(V1.params.tol):
            raise ValueError(f"tensor product fails relations: {rep.residuals}")
    return out


def qtensor(W1, W2, zeta: complex):
    """W1 (x)_zeta W2 for quantum-loop representations (fields in z)."""
    from .gamma_functor import QLoopRep

    _check_separation([zeta * p for p in W1.sigma()], W2.sigma(), "qtensor")
    n1, n2 = W1.dim, W2.dim
    I1 = RationalMatrixFunction.identity(n1)
    I2 = RationalMatrixFunction.identity(n2)
    psi, xp, xm = [], [], []
    for i in range(W1.rank):
        p1 = W1.psi[i].rescale(zeta)
        psi.append(p1.kron(W2.psi[i]))
        c, poles = _kernel_residues(W2.xp[i], p1, holo_left=True, const_kernel=True)
        xp.append(W1.xp[i].rescale(zeta).kron(I2) + RationalMatrixFunction(c, poles))
        c, poles = _kernel_residues(W1.xm[i].rescale(zeta), W2.psi[i], holo_left=False, const_kernel=True)
        xm.append(RationalMatrixFunction(c, poles) + I1.kron(W2.xm[i]))
    chans = None
    if W1.psi_channels is not None and W2.psi_channels is not None:
        chans = tuple(
            tuple(a.rescale(zeta) * b for a in W1.psi_channels[i] for b in W2.psi_channels[i]) for i in range(W1.rank)
        )
    h0 = None
    if W1.h0 is not None and W2.h0 is not None:
        h0 = tuple(np.kron(a, np.eye(n2)) + np.kron(np.eye(n1), b) for a, b in zip(W1.h0, W2.h0))
    return QLoopRep(W1.cartan, W1.params, n1 * n2, tuple(psi), tuple(xp), tuple(xm), chans, "tensor", h0)


def _field_defect(A, B, samples: np.ndarray) -> float:
    worst = 0.0
    for fa, fb in zip(A, B):
        worst = max(worst, float(np.max(np.abs(fa.eval(samples) - fb.eval(samples)))))
    return worst


def check_associativity(V1: YangianRep, V2: YangianRep, V3: YangianRep, s1: complex, s2: complex, n_samples: int = 50) -> float:
    """max |(V1 (x)_s1 V2) (x)_s2 V3 - V1 (x)_{s1+s2} (V2 (x)_s2 V3)| over fields and samples."""
    left = ytensor(ytensor(V1, V2, s1), V3, s2)
    right = ytensor(V1, ytensor(V2, V3, s2), s1 + s2)
    from .yangian_rep import sample_annulus

    pts = sample_annulus(left.sigma() + right.sigma(), n_samples, V1.params.rng(11))
    return max(
        _field_defect(left.xi, right.xi, pts),
        _field_defect(left.xp, right.xp, pts),
        _field_defect(left.xm, right.xm, pts),
    )


def check_associativity_q(W1, W2, W3, z1: complex, z2: complex, n_samples: int = 50) -> float:
    """Quantum-loop analogue with multiplicative parameters: (W1 (x)_z1 W2) (x)_z2 W3 vs W1 (x)_{z1 z2} (W2 (x)_z2 W3)."""
    left = qtensor(qtensor(W1, W2, z1), W3, z2)
    right = qtensor(W1, qtensor(W2, W3, z2), z1 * z2)
    from .yangian_rep import sample_annulus

    pts = sample_annulus(left.sigma() + right.sigma(), n_samples, W1.params.rng(12), inner=0.2, outer=5.0)
    return max(
        _field_defect(left.psi, right.psi, pts),
        _field_defect(left.xp, right.xp, pts),
        _field_defect(left.xm, right.xm, pts),
    )
