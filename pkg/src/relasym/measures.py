"""Base measures on [-1, 1]: recurrence tables, Gauss rules, inner products.

A measure is a classical weight on [-1, 1] (Chebyshev, Legendre, Jacobi)
plus finitely many point masses strictly outside the interval.  Everything
downstream works through the three-term recurrence of its monic orthogonal
polynomials

    L_{k+1}(x) = (x - b_k) L_k(x) - a_k^2 L_{k-1}(x),

with orthonormal off-diagonal entries a_k > 0 and leading coefficients
tau_k such that l_k = tau_k L_k is orthonormal.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "MeasureError",
    "BaseMeasureSpec",
    "RecurrenceTable",
    "QuadratureRule",
    "recurrence_for",
    "gauss_rule",
    "rule_for",
    "inner_mu",
]

WEIGHT_KINDS = ("chebyshev_first_kind", "chebyshev_second_kind", "legendre", "jacobi")

# Stieltjes discretization control (doubling until coefficients settle).
STIELTJES_TOL = 1e-12
STIELTJES_MAX_DOUBLINGS = 6


class MeasureError(ValueError):
    """Invalid measure description or failed discretization."""


@dataclass(frozen=True)
class BaseMeasureSpec:
    """Weight kind, Jacobi exponents, and point masses off [-1, 1]."""

    weight_kind: str
    alpha: float = 0.0      # exponent of (1-x), jacobi only
    beta: float = 0.0       # exponent of (1+x), jacobi only
    mass_points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.weight_kind not in WEIGHT_KINDS:
            raise MeasureError(f"unknown weight_kind {self.weight_kind!r}")
        a, b = self.jacobi_exponents()
        if a <= -1.0 or b <= -1.0:
            raise MeasureError("jacobi exponents must exceed -1")
        for loc, mass in self.mass_points:
            if abs(loc) <= 1.0:
                raise MeasureError(f"mass point location {loc} must lie outside [-1,1]")
            if mass <= 0.0:
                raise MeasureError(f"mass {mass} must be positive")

    def jacobi_exponents(self) -> tuple[float, float]:
        if self.weight_kind == "chebyshev_first_kind":
            return (-0.5, -0.5)
        if self.weight_kind == "chebyshev_second_kind":
            return (0.5, 0.5)
        if self.weight_kind == "legendre":
            return (0.0, 0.0)
        return (self.alpha, self.beta)

    @property
    def has_atoms(self) -> bool:
        return bool(self.mass_points)

    def continuous_mass(self) -> float:
        a, b = self.jacobi_exponents()
        return 2.0 ** (a + b + 1.0) * math.exp(
            math.lgamma(a + 1.0) + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0)
        )

    def pure(self) -> "BaseMeasureSpec":
        """The same weight with the atoms dropped."""
        if not self.mass_points:
            return self
        return BaseMeasureSpec(self.weight_kind, self.alpha, self.beta, ())

    def to_json_dict(self) -> dict:
        return {
            "weight_kind": self.weight_kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "mass_points": [[loc, mass] for loc, mass in self.mass_points],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "BaseMeasureSpec":
        return cls(
            weight_kind=d["weight_kind"],
            alpha=float(d.get("alpha", 0.0)),
            beta=float(d.get("beta", 0.0)),
            mass_points=tuple((float(p[0]), float(p[1])) for p in d.get("mass_points", ())),
        )


@dataclass
class RecurrenceTable:
    """Recurrence coefficients and leading coefficients up to degree nmax.

    Internal layout: ``b[k]`` is valid for k = 0..nmax and ``a[k]`` for
    k = 1..nmax; ``a[0]`` is a zero placeholder so recurrence loops index
    naturally.  ``tau[k]`` is the leading coefficient of the orthonormal
    l_k, so tau[0] = 1/sqrt(total mass) and tau[k+1] = tau[k]/a[k+1].
    The JSON form stores a without the placeholder (a_1..a_nmax).
    """

    a: np.ndarray
    b: np.ndarray
    tau: np.ndarray
    spec: BaseMeasureSpec | None = None

    @property
    def nmax(self) -> int:
        return len(self.b) - 1

    @property
    def total_mass(self) -> float:
        return float(1.0 / self.tau[0] ** 2)

    def to_json(self) -> str:
        payload = {
            "a": [float(v) for v in self.a[1:]],
            "b": [float(v) for v in self.b],
            "tau": [float(v) for v in self.tau],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, spec: BaseMeasureSpec | None = None) -> "RecurrenceTable":
        d = json.loads(text)
        a = np.concatenate([[0.0], np.asarray(d["a"], dtype=float)])
        return cls(a=a, b=np.asarray(d["b"], dtype=float),
                   tau=np.asarray(d["tau"], dtype=float), spec=spec)


@dataclass
class QuadratureRule:
    """Gauss nodes/weights for the continuous part plus exact atoms."""

    nodes: np.ndarray
    weights: np.ndarray
    atoms: tuple[tuple[float, float], ...] = ()

    def all_points(self) -> np.ndarray:
        if not self.atoms:
            return self.nodes
        return np.concatenate([self.nodes, [loc for loc, _ in self.atoms]])

    def all_weights(self) -> np.ndarray:
        if not self.atoms:
            return self.weights
        return np.concatenate([self.weights, [mass for _, mass in self.atoms]])

    @property
    def size(self) -> int:
        return len(self.nodes)


def _jacobi_ab(alpha: float, beta: float, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Monic Jacobi recurrence: b_k diagonal, asq_k = a_k^2 off-diagonal."""
    s = alpha + beta
    k = np.arange(nmax + 1, dtype=float)
    b = np.empty(nmax + 1)
    b[0] = (beta - alpha) / (s + 2.0)
    if nmax >= 1:
        num = beta * beta - alpha * alpha
        den = (2.0 * k[1:] + s) * (2.0 * k[1:] + s + 2.0)
        b[1:] = num / den
    asq = np.zeros(nmax + 1)
    if nmax >= 1:
        # k = 1 in factored form: the (k + s) factor cancels against the
        # (2k + s - 1) zero when s = -1, so the generic formula is 0/0 there.
        asq[1] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + s) ** 2 * (3.0 + s))
    if nmax >= 2:
        kk = k[2:]
        nab = 2.0 * kk + s
        asq[2:] = (4.0 * kk * (kk + alpha) * (kk + beta) * (kk + s)
                   / (nab * nab * (nab + 1.0) * (nab - 1.0)))
    return b, asq


def _tau_from(asq: np.ndarray, total_mass: float) -> np.ndarray:
    tau = np.empty(len(asq))
    tau[0] = 1.0 / math.sqrt(total_mass)
    for kk in range(1, len(asq)):
        tau[kk] = tau[kk - 1] / math.sqrt(asq[kk])
    return tau


def _discrete_recurrence(nodes: np.ndarray, weights: np.ndarray, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    """Recurrence coefficients of the discrete measure sum w_i delta(x_i).

    Lanczos-type updating (Rutishauser/Kahan/Pal/Walker kernel): points are
    absorbed one at a time by orthogonal similarity on the growing Jacobi
    matrix.  The naive moment-iteration form of the Stieltjes procedure
    loses most digits here when a point mass sits outside [-1, 1].
    """
    ncap = len(nodes)
    if nmax + 1 >= ncap:
        raise MeasureError("discretization too small for requested nmax")
    p0 = np.asarray(nodes, dtype=float).copy()
    p1 = np.zeros(ncap)
    p1[0] = weights[0]
    for n in range(ncap - 1):
        pn = float(weights[n + 1])
        gam, sig, t = 1.0, 0.0, 0.0
        xlam = float(nodes[n + 1])
        for k in range(n + 2):
            rho = p1[k] + pn
            tmp = gam * rho
            tsig = sig
            if rho <= 0.0:
                gam, sig = 1.0, 0.0
            else:
                gam = p1[k] / rho
                sig = pn / rho
            tk = sig * (p0[k] - xlam) - gam * t
            p0[k] -= tk - t
            t = tk
            if sig <= 0.0:
                pn = tsig * p1[k]
            else:
                pn = t * t / sig
            p1[k] = tmp
    b = p0[: nmax + 1].copy()
    asq = p1[: nmax + 1].copy()
    asq[0] = 0.0
    return b, asq


def _pure_rule(spec: BaseMeasureSpec, m: int) -> tuple[np.ndarray, np.ndarray]:
    alpha, beta = spec.jacobi_exponents()
    b, asq = _jacobi_ab(alpha, beta, m)
    vals, vecs = eigh_tridiagonal(b[:m], np.sqrt(asq[1:m]))
    nodes = np.clip(vals, -1.0, 1.0)
    weights = spec.continuous_mass() * vecs[0] ** 2
    return nodes, weights


_ATOM_RECURRENCE_CACHE: dict[BaseMeasureSpec, tuple[int, np.ndarray, np.ndarray]] = {}


def _atom_recurrence(spec: BaseMeasureSpec, nmax: int) -> tuple[np.ndarray, np.ndarray]:
    atom_locs = np.array([loc for loc, _ in spec.mass_points])
    atom_masses = np.array([mass for _, mass in spec.mass_points])
    m = max(4 * nmax, 200)
    prev = None
    for _ in range(STIELTJES_MAX_DOUBLINGS):
        nodes, weights = _pure_rule(spec, m)
        all_nodes = np.concatenate([nodes, atom_locs])
        all_weights = np.concatenate([weights, atom_masses])
        b, asq = _discrete_recurrence(all_nodes, all_weights, nmax)
        if prev is not None:
            b0, asq0 = prev
            if max(np.max(np.abs(b - b0)), np.max(np.abs(asq - asq0))) < STIELTJES_TOL:
                return b, asq
        prev = (b, asq)
        m *= 2
    raise MeasureError("discretized recurrence did not converge under rule doubling")


def recurrence_for(spec: BaseMeasureSpec, nmax: int) -> RecurrenceTable:
    """Recurrence table for the measure, atoms folded into the inner product.

    Pure weights use the closed-form Jacobi coefficients.  With atoms the
    coefficients come from a discretized inner product (Gauss rule of the
    pure weight plus the exact point masses, reduced by the Lanczos-type
    kernel); the rule is doubled until no coefficient moves by more than
    STIELTJES_TOL.  Atom tables are memoized per spec since the reduction
    costs O(m^2).
    """
    if nmax < 1:
        raise MeasureError("nmax must be >= 1")
    alpha, beta = spec.jacobi_exponents()
    if not spec.has_atoms:
        b, asq = _jacobi_ab(alpha, beta, nmax)
        tau = _tau_from(asq, spec.continuous_mass())
        a = np.concatenate([[0.0], np.sqrt(asq[1:])])
        return RecurrenceTable(a=a, b=b, tau=tau, spec=spec)

    cached = _ATOM_RECURRENCE_CACHE.get(spec)
    if cached is None or cached[0] < nmax:
        b_full, asq_full = _atom_recurrence(spec, nmax)
        _ATOM_RECURRENCE_CACHE[spec] = (nmax, b_full, asq_full)
    else:
        _, b_full, asq_full = cached
    b = b_full[: nmax + 1].copy()
    asq = asq_full[: nmax + 1].copy()
    total = spec.continuous_mass() + sum(mass for _, mass in spec.mass_points)
    tau = _tau_from(asq, total)
    a = np.concatenate([[0.0], np.sqrt(asq[1:])])
    return RecurrenceTable(a=a, b=b, tau=tau, spec=spec)


def gauss_rule(table: RecurrenceTable, m: int) -> QuadratureRule:
    """m-point Gauss rule.  Atoms of the generating measure ride along.

    For a table built from a measure with atoms the nodes/weights are those
    of the pure weight (so nodes stay inside [-1,1]) and the atoms are kept
    as exact point masses; otherwise plain Golub-Welsch on the table.
    """
    if m < 1:
        raise MeasureError("rule size must be >= 1")
    if m > table.nmax:
        if table.spec is None:
            raise MeasureError(f"rule size {m} exceeds table nmax {table.nmax}")
        table = recurrence_for(table.spec, m)
    if table.spec is not None and table.spec.has_atoms:
        nodes, weights = _pure_rule(table.spec, m)
        return QuadratureRule(nodes=nodes, weights=weights, atoms=table.spec.mass_points)
    offdiag = table.a[1:m]
    vals, vecs = eigh_tridiagonal(table.b[:m], offdiag)
    nodes = np.clip(vals, -1.0, 1.0)
    weights = table.total_mass * vecs[0] ** 2
    return QuadratureRule(nodes=nodes, weights=weights, atoms=())


def rule_for(spec: BaseMeasureSpec, m: int) -> QuadratureRule:
    """Gauss rule of the pure weight plus the measure's atoms."""
    nodes, weights = _pure_rule(spec, m)
    return QuadratureRule(nodes=nodes, weights=weights, atoms=spec.mass_points)


_ATOM_VALUE_PAD = 40


def atom_basis_values(table: RecurrenceTable, deg: int, loc: float) -> np.ndarray:
    """Orthonormal basis values l_0(loc)..l_deg(loc) at a mass point of the
    table's own measure.

    Forward recurrence is useless here: the values at a mass point are
    square summable, hence the minimal solution of the three-term
    recurrence, and forward errors grow with the dominant one.  Backward
    recurrence from a padded tail with normalization through l_0 recovers
    them to near machine accuracy.
    """
    need = deg + _ATOM_VALUE_PAD
    tab = table
    if tab.nmax < need + 1:
        if tab.spec is None:
            raise MeasureError("table too short for stable evaluation at its atom")
        tab = recurrence_for(tab.spec, need + 1)
    a, b = tab.a, tab.b
    vals = np.zeros(need + 1)
    vals[need] = 0.0
    vals[need - 1] = 1.0
    for k in range(need - 1, 0, -1):
        vals[k - 1] = ((loc - b[k]) * vals[k] - a[k + 1] * vals[k + 1]) / a[k]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1 :] *= 1e-250
    return vals[: deg + 1] * (tab.tau[0] / vals[0])


def _value_at_atom(p, loc: float) -> complex:
    """p(loc) for an atom of the measure behind p's table."""
    table = p.table
    spec = getattr(table, "spec", None)
    if spec is None or all(abs(al - loc) > 0.0 for al, _ in spec.mass_points):
        return p.values(complex(loc))
    lvals = atom_basis_values(table, p.degree, loc)
    if p.basis == "monic_mu":
        lvals = lvals / table.tau[: p.degree + 1]
    return complex(np.sum(p.coeffs * lvals))


def inner_mu(p, q, rule: QuadratureRule) -> complex:
    """Bilinear integral of p*q against the measure (no conjugation).

    p and q are PolyInBasis values; the rule must be exact for
    deg p + deg q against the continuous part.  Atom contributions use the
    backward-stable point evaluation when the atom belongs to the measure
    behind the polynomial's table.
    """
    if 2 * rule.size - 1 < p.degree + q.degree:
        raise MeasureError("quadrature rule too small for requested inner product")
    total = np.sum(rule.weights * p.values(rule.nodes) * q.values(rule.nodes))
    for loc, mass in rule.atoms:
        total += mass * _value_at_atom(p, loc) * _value_at_atom(q, loc)
    return complex(total)
