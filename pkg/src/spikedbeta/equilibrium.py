"""One-cut equilibrium measure of a polynomial potential.

The density is Psi(x) = (1/2pi) sqrt((b2-x)(x-b1)) h(x) on [b1, b2]. Endpoints come
from the two moment conditions, h from the divided difference of V', and every
logarithmic integral is done in closed form after expanding the density in
second-kind Chebyshev polynomials.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegreeMismatch, MultiBandSuspected, NewtonDiverged
from .numerics import ChebGrid, MU_NODES
from .potential import Potential, fmt17, horner, potential_from_json

_MOMENT_NODES = 64


@dataclass(frozen=True)
class EquilibriumMeasure:
    b1: float
    b2: float
    h_coeffs: tuple  # ascending powers of x
    ell: float
    potential_hash: str
    potential: Potential | None = field(default=None, compare=False, repr=False)
    m: int = MU_NODES

    @property
    def center(self) -> float:
        return 0.5 * (self.b1 + self.b2)

    @property
    def radius(self) -> float:
        return 0.5 * (self.b2 - self.b1)

    @property
    def e(self) -> float:
        return self.b2

    @property
    def grid(self) -> ChebGrid:
        return ChebGrid(self.b1, self.b2, self.m)

    def h(self, x):
        return horner(np.asarray(self.h_coeffs), x)

    def density(self, x):
        return density(self, x)

    @cached_property
    def u_coeffs(self) -> np.ndarray:
        """beta_k with h(c + r t) = sum_k beta_k U_k(t)."""
        return _u_expansion(self.h_coeffs, self.center, self.radius)

    def with_ell(self, ell: float) -> "EquilibriumMeasure":
        return EquilibriumMeasure(self.b1, self.b2, self.h_coeffs, ell, self.potential_hash,
                                  self.potential, self.m)

    def with_h(self, h_coeffs) -> "EquilibriumMeasure":
        return EquilibriumMeasure(self.b1, self.b2, tuple(h_coeffs), self.ell,
                                  self.potential_hash, self.potential, self.m)

    def to_dict(self) -> dict:
        return {"b1": self.b1, "b2": self.b2, "h": list(self.h_coeffs), "ell": self.ell,
                "potential": self.potential.to_dict() if self.potential else None}

    def to_json(self) -> str:
        pot = self.potential.to_json() if self.potential else "null"
        return ('{"b1": ' + fmt17(self.b1) + ', "b2": ' + fmt17(self.b2) + ', "h": ['
                + ", ".join(fmt17(c) for c in self.h_coeffs) + '], "ell": ' + fmt17(self.ell)
                + ', "potential": ' + pot + "}")

    @classmethod
    def from_json(cls, text: str) -> "EquilibriumMeasure":
        d = json.loads(text)
        V = potential_from_json(d["potential"])
        return cls(d["b1"], d["b2"], tuple(d["h"]), d["ell"], V.hash, V)


def _u_expansion(h_coeffs, c, r) -> np.ndarray:
    deg = len(h_coeffs) - 1
    g = ChebGrid(-1.0, 1.0, deg + 2, "second")
    t, w = g.t, g.weights
    q = horner(np.asarray(h_coeffs), c + r * t)
    th = np.arccos(t)
    out = np.empty(deg + 1)
    for k in range(deg + 1):
        uk = np.sin((k + 1) * th) / np.sin(th)
        out[k] = 2 / np.pi * np.dot(w, q * uk)
    return out


# ---------------------------------------------------------------------------
# endpoints

def _moments(V: Potential, c: float, r: float):
    """S0, S1 and their Jacobian in (c, r) by Gauss-Chebyshev (exact for polynomials)."""
    n = max(_MOMENT_NODES, V.degree + 4)
    t = ChebGrid(-1.0, 1.0, n).t
    w = np.pi / n
    x = c + r * t
    d1 = V(x, 1)
    d2 = V(x, 2)
    S0 = w * d1.sum()
    S1 = w * (x * d1).sum()
    J = np.array([[w * d2.sum(), w * (t * d2).sum()],
                  [w * (d1 + x * d2).sum(), w * (t * d1 + x * t * d2).sum()]])
    return np.array([S0, S1 - 2 * np.pi]), J


def _initial_radius(V: Potential) -> float:
    # exact radius for the pure monomial lead term gamma x^{2l}
    l2 = V.degree
    gamma = V.coeffs[-1]
    ratio = 1.0
    for j in range(1, l2 // 2 + 1):
        ratio *= (2 * j) / (2 * j - 1)  # (2l)!! / (2l-1)!!
    return (ratio / ((l2 // 2) * gamma)) ** (1.0 / l2)


def _newton(V, c, r, tol, maxit=200):
    res, J = _moments(V, c, r)
    for _ in range(maxit):
        nrm = np.max(np.abs(res))
        if nrm < tol:
            return c, r, res
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-10:
            cn, rn = c + lam * step[0], r + lam * step[1]
            if rn > 0:
                rn_res, Jn = _moments(V, cn, rn)
                if np.max(np.abs(rn_res)) < nrm * (1 - 1e-4 * lam) or np.max(np.abs(rn_res)) < tol:
                    c, r, res, J = cn, rn, rn_res, Jn
                    break
            lam *= 0.5
        else:
            break
    raise NewtonDiverged("endpoint Newton iteration did not converge", (c - r, c + r), res)


def solve_support(V: Potential, init: tuple | None = None, tol: float = 1e-12) -> tuple:
    """Endpoints (b1, b2) solving int V'/sqrt = 0 and int s V'/sqrt = 2 pi."""
    if init is not None:
        c0, r0 = 0.5 * (init[0] + init[1]), 0.5 * (init[1] - init[0])
    else:
        c0, r0 = 0.0, _initial_radius(V)
    try:
        c, r, _ = _newton(V, c0, r0, tol)
    except NewtonDiverged as exc:
        # coarse grid fallback
        best = None
        for cc in np.linspace(-10, 10, 81):
            for rr in np.geomspace(1e-2, 1e2, 81):
                res, _ = _moments(V, cc, rr)
                v = np.max(np.abs(res))
                if best is None or v < best[0]:
                    best = (v, cc, rr)
        try:
            c, r, _ = _newton(V, best[1], best[2], tol)
        except NewtonDiverged:
            raise exc
    # polish: one more Newton step tends to settle the last bits
    res, J = _moments(V, c, r)
    step = np.linalg.solve(J, -res)
    c2, r2 = c + step[0], r + step[1]
    res2, _ = _moments(V, c2, r2)
    if np.max(np.abs(res2)) <= np.max(np.abs(res)):
        c, r = c2, r2
    return (c - r, c + r)


def compute_h(V: Potential, b1: float, b2: float) -> np.ndarray:
    """h(x) = (1/pi) int (V'(x)-V'(s)) / ((x-s) sqrt((s-b1)(b2-s))) ds, as coefficients."""
    d = V.deriv_coeffs(1)  # V'(x) = sum d_j x^j
    n = max(_MOMENT_NODES, V.degree + 4)
    g = ChebGrid(b1, b2, n)
    s = g.nodes
    M = np.array([np.pi / n * np.sum(s ** k) for k in range(len(d))])
    deg = len(d) - 2
    h = np.zeros(deg + 1)
    for i in range(deg + 1):
        h[i] = sum(d[j] * M[j - 1 - i] for j in range(i + 1, len(d))) / np.pi
    if deg != V.degree - 2 or h[-1] == 0:
        raise DegreeMismatch(f"h has degree {deg}, expected {V.degree - 2}")
    return h


# ---------------------------------------------------------------------------
# log potentials

def _log_T(t, jmax):
    """L_j(t) = int log|t - tau| T_j(tau) / sqrt(1 - tau^2) dtau for j = 0..jmax, real t."""
    t = np.asarray(t, dtype=float)
    out = np.empty((jmax + 1,) + t.shape)
    inside = np.abs(t) <= 1
    ti = np.clip(t, -1, 1)
    th = np.arccos(ti)
    at = np.abs(t)
    phi = np.where(inside, 1.0, at + np.sqrt(np.maximum(at * at - 1, 0.0)))
    sg = np.sign(t)
    out[0] = np.where(inside, -np.pi * math.log(2), np.pi * np.log(phi / 2))
    for j in range(1, jmax + 1):
        out[j] = np.where(inside, -np.pi * np.cos(j * th) / j, -np.pi * (sg / phi) ** j / j)
    return out


def _phi(Z):
    """Joukowski inverse Z + sqrt(Z-1) sqrt(Z+1), |phi| >= 1 off [-1, 1]."""
    Z = np.asarray(Z, dtype=complex)
    return Z + np.sqrt(Z - 1) * np.sqrt(Z + 1)


def log_potential(eqm: EquilibriumMeasure, x):
    """U(x) = int log|x - s| Psi(s) ds for real x (any position)."""
    x = np.asarray(x, dtype=float)
    c, r = eqm.center, eqm.radius
    b = eqm.u_coeffs
    t = (x - c) / r
    L = _log_T(t, len(b) + 1)
    acc = (np.pi / 2) * b[0] * math.log(r)
    for k, bk in enumerate(b):
        acc = acc + bk * 0.5 * (L[k] - L[k + 2])
    out = r * r / (2 * np.pi) * acc
    return out[()] if out.ndim == 0 else out


def g_complex(eqm: EquilibriumMeasure, z):
    """g(z) = int log(z - s) Psi(s) ds, principal branch, z off (-inf, b2]."""
    z = np.asarray(z, dtype=complex)
    c, r = eqm.center, eqm.radius
    b = eqm.u_coeffs
    Z = (z - c) / r
    phi = _phi(Z)
    jmax = len(b) + 1
    L = [np.pi * np.log(phi / 2)] + [-np.pi * phi ** (-j) / j for j in range(1, jmax + 1)]
    acc = (np.pi / 2) * b[0] * math.log(r) + 0 * Z
    for k, bk in enumerate(b):
        acc = acc + bk * 0.5 * (L[k] - L[k + 2])
    out = r * r / (2 * np.pi) * acc
    return out[()] if out.ndim == 0 else out


def stieltjes(eqm: EquilibriumMeasure, z):
    """g'(z) = int Psi(s) / (z - s) ds."""
    z = np.asarray(z, dtype=complex)
    Z = (z - eqm.center) / eqm.radius
    phi = _phi(Z)
    b = eqm.u_coeffs
    acc = 0 * Z
    for k, bk in enumerate(b):
        acc = acc + bk * phi ** (-(k + 1))
    out = 0.5 * eqm.radius * acc
    return out[()] if out.ndim == 0 else out


def stieltjes_deriv(eqm: EquilibriumMeasure, z):
    """g''(z) = -int Psi(s) / (z - s)^2 ds."""
    z = np.asarray(z, dtype=complex)
    Z = (z - eqm.center) / eqm.radius
    phi = _phi(Z)
    sq = np.sqrt(Z - 1) * np.sqrt(Z + 1)
    b = eqm.u_coeffs
    acc = 0 * Z
    for k, bk in enumerate(b):
        acc = acc + bk * (k + 1) * phi ** (-(k + 1))
    out = -0.5 * acc / sq
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------

def lagrange_constant(eqm: EquilibriumMeasure, V: Potential, x0: float | None = None) -> float:
    if x0 is None:
        x0 = eqm.center
    return float(2 * log_potential(eqm, x0) - V(x0))


def density(eqm: EquilibriumMeasure, x):
    x = np.asarray(x, dtype=float)
    inside = (x > eqm.b1) & (x < eqm.b2)
    xc = np.clip(x, eqm.b1, eqm.b2)
    out = np.where(inside, np.sqrt((eqm.b2 - xc) * (xc - eqm.b1)) * eqm.h(xc) / (2 * np.pi), 0.0)
    return out[()] if out.ndim == 0 else out


def solve_equilibrium(V: Potential, init: tuple | None = None, m: int = MU_NODES,
                      check_density: bool = True) -> EquilibriumMeasure:
    b1, b2 = solve_support(V, init)
    h = compute_h(V, b1, b2)
    eqm = EquilibriumMeasure(b1, b2, tuple(float(v) for v in h), 0.0, V.hash, V, m)
    if check_density:
        xs = np.linspace(b1, b2, 2001)[1:-1]
        dens = eqm.h(xs) * np.sqrt((b2 - xs) * (xs - b1))
        if dens.min() < -1e-10:
            raise MultiBandSuspected("density negative on the support; one-band ansatz fails")
    return eqm.with_ell(lagrange_constant(eqm, V))


@dataclass
class VariationalReport:
    interior_residual: float
    exterior_margin: float
    n_interior: int
    n_exterior: int

    @property
    def ok(self) -> bool:
        return self.interior_residual <= 1e-8 and self.exterior_margin > 0

    def to_dict(self):
        return dict(self.__dict__)


def verify_variational(eqm: EquilibriumMeasure, V: Potential, n_interior: int = 200,
                       n_exterior: int = 200, horizon: float | None = None) -> VariationalReport:
    """Max interior residual of 2U - V - ell and min exterior margin ell - (2U - V)."""
    b1, b2 = eqm.b1, eqm.b2
    xi = np.linspace(b1, b2, n_interior + 2)[1:-1]
    res = np.abs(2 * log_potential(eqm, xi) - V(xi) - eqm.ell)
    L = 10 * (b2 - b1) if horizon is None else horizon
    k = np.arange(1, n_exterior // 2 + 2) / (n_exterior // 2 + 1)
    xe = np.concatenate([b1 - L * k[::-1], b2 + L * k])
    margin = eqm.ell - (2 * log_potential(eqm, xe) - V(xe))
    return VariationalReport(float(res.max()), float(margin.min()), n_interior, len(xe))
