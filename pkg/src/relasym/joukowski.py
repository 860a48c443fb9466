"""The map phi(z) = z + sqrt(z^2 - 1) and the closed-form limit functions.

Branch: sqrt(z^2 - 1) is computed as sqrt(z-1)*sqrt(z+1) with principal
square roots, which is positive for z > 1 and continuous off the cut
[-1, 1]; then |phi| > 1 off the cut and phi(z) ~ 2z at infinity.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "CutDomainError",
    "dist_to_cut",
    "phi",
    "sqrt_z2m1",
    "cheb_transform",
    "limit_modified",
    "limit_sobolev",
    "kappa_tau_limit",
    "factor_identity_check",
]

NEAR_CUT = 1e-12


class CutDomainError(ValueError):
    """Input on (or indistinguishably close to) the cut [-1, 1]."""


def dist_to_cut(z) -> np.ndarray:
    """Euclidean distance from z to the segment [-1, 1]."""
    zz = np.asarray(z, dtype=complex)
    x, y = zz.real, zz.imag
    dx = np.maximum(np.abs(x) - 1.0, 0.0)
    return np.hypot(dx, y)


def _require_off_cut(z) -> None:
    if np.any(dist_to_cut(z) < NEAR_CUT):
        raise CutDomainError("point within 1e-12 of the cut [-1, 1]")


def sqrt_z2m1(z):
    """sqrt(z^2 - 1), positive for z > 1, continuous off the cut."""
    _require_off_cut(z)
    zz = np.asarray(z, dtype=complex)
    out = np.sqrt(zz - 1.0) * np.sqrt(zz + 1.0)
    return complex(out) if np.ndim(z) == 0 else out


def phi(z):
    """z + sqrt(z^2 - 1) on the correct branch; |phi| > 1 off the cut."""
    _require_off_cut(z)
    zz = np.asarray(z, dtype=complex)
    out = zz + np.sqrt(zz - 1.0) * np.sqrt(zz + 1.0)
    return complex(out) if np.ndim(z) == 0 else out


def cheb_transform(nu: int, z) -> complex:
    """Normalized Cauchy transform of the first-kind Chebyshev polynomial.

    Closed form of (1/pi) * Integral of t_nu(x) / ((z-x) sqrt(1-x^2)) dx,
    namely 1/(phi(z)^nu * sqrt(z^2 - 1)); t_0 = 1, t_1(x) = x and
    t_{nu+1} = 2x t_nu - t_{nu-1}.
    """
    if nu < 0:
        raise ValueError("nu must be >= 0")
    return phi(z) ** (-nu) / sqrt_z2m1(z)


def limit_modified(z, r) -> complex:
    """Limit of Q_n/L_n for the modification r = S/T of the base measure.

    (1/2)^A * prod over poles (1 - 1/(phi(z) phi(d_j)))^{B_j}
            * prod over zeros ((phi(z) - phi(c_i)) / (z - c_i))^{A_i}.
    """
    pz = phi(z)
    out = 0.5 ** r.A + 0.0j
    for d, bj in r.poles:
        out *= (1.0 - 1.0 / (pz * phi(d))) ** bj
    for c, ai in r.zeros:
        if abs(z - c) < 1e-13 * max(1.0, abs(c)):
            # removable point z = c: the difference quotient tends to phi'(c)
            out *= (phi(c) / sqrt_z2m1(c)) ** ai
        else:
            out *= ((pz - phi(c)) / (z - c)) ** ai
    return complex(out)


def limit_sobolev(z, factors) -> complex:
    """Limit of S_n/L_n: product of ((phi(z)-phi(c))^2 / (2 phi(z)(z-c)))^e.

    factors is a list of (c_j, e_j); e_j is the attraction count of c_j
    (the dimension of the reduced coefficient matrix, or N_j+1 in the
    Pade case).  Empty list gives 1.
    """
    pz = phi(z)
    out = 1.0 + 0.0j
    for c, e in factors:
        if abs(z - c) < 1e-13 * max(1.0, abs(c)):
            return 0.0 + 0.0j   # the factor vanishes linearly at z = c
        out *= ((pz - phi(c)) ** 2 / (2.0 * pz * (z - c))) ** e
    return complex(out)


def kappa_tau_limit(r) -> complex:
    """Limit of kappa_n^2 / tau_n^2 for the modification r."""
    out = (-2.0 + 0.0j) ** (r.A - r.B)
    for d, bj in r.poles:
        out *= phi(d) ** bj
    for c, ai in r.zeros:
        out /= phi(c) ** ai
    return complex(out)


def factor_identity_check(z, c) -> float:
    """|((phi(z)-phi(c))/(2(z-c))) * (1 - 1/(phi(z)phi(c))) - 1|.

    Exactly zero in exact arithmetic; a branch-consistency probe.
    """
    pz, pc = phi(z), phi(c)
    lhs = (pz - pc) / (2.0 * (z - c)) * (1.0 - 1.0 / (pz * pc))
    return abs(lhs - 1.0)
