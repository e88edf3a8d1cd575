"""g-function, c(a), the exponents G and H, the critical spike a_c and maximizer
classification for a rank-one spike a > 0."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .equilibrium import EquilibriumMeasure, g_complex, stieltjes, stieltjes_deriv
from .errors import (AtEdge, BranchCut, InputError, NoInteriorMaximum, NonpositiveSpike,
                     SearchHorizonExceeded)
from .potential import Potential

TIE_TOL = 1e-8
ZERO_DERIV = 1e-7

SUBCRITICAL = "Subcritical"
SUPERCRITICAL = "SupercriticalUnique"
SECONDARY = "SecondaryCritical"
AT_CRITICAL = "AtCritical"
UNRESOLVED = "Unresolved"


def g_value(eqm: EquilibriumMeasure, z):
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real < eqm.b2)):
        raise BranchCut("z lies on the cut (-inf, e)")
    return g_complex(eqm, z)


def _g_real(eqm, x):
    return np.real(g_complex(eqm, np.asarray(x, dtype=float) + 0j))


def g_deriv(eqm: EquilibriumMeasure, x, order: int = 1):
    """order-th derivative of g at real x > e.

    Orders 1 and 2 are closed form; higher orders use a Cauchy integral of g' on
    a small circle around x.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < eqm.b2):
        raise BranchCut("g_deriv needs x >= e")
    if order == 0:
        return _g_real(eqm, x)
    if order == 1:
        return np.real(stieltjes(eqm, x + 0j))
    if order == 2:
        if np.any(x <= eqm.b2):
            raise BranchCut("g'' is singular at the edge")
        return np.real(stieltjes_deriv(eqm, x + 0j))
    return _cauchy_deriv(eqm, x, order - 1)


def _cauchy_deriv(eqm, x, j, npts=64):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rho = np.minimum(0.5 * (x - eqm.b2), 0.5 * eqm.radius)
    th = 2 * np.pi * np.arange(npts) / npts
    ring = np.exp(1j * th)
    vals = stieltjes(eqm, x[:, None] + rho[:, None] * ring[None, :])
    coef = (vals * ring[None, :] ** (-j)).mean(axis=1) / rho ** j
    out = math.factorial(j) * coef.real
    return out[0] if out.size == 1 else out


def _Gprime(eqm, V, a, x):
    return g_deriv(eqm, x, 1) - V(x, 1) + a


def c_of_a(eqm: EquilibriumMeasure, V: Potential, a: float) -> float:
    """Root of g'(c) = a on (e, inf) when a < V'(e)/2, else e."""
    if not a > 0:
        raise NonpositiveSpike("spike a must be positive")
    e = eqm.b2
    if a >= 0.5 * V(e, 1):
        return e
    f = lambda x: float(g_deriv(eqm, x, 1)) - a
    hi = e + eqm.radius
    while f(hi) > 0:
        hi = e + 2 * (hi - e)
        if hi - e > 1e12:
            raise SearchHorizonExceeded("no root of g'(c)=a found")
    c = brentq(f, e, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    for _ in range(3):
        d2 = float(g_deriv(eqm, c, 2)) if c > e else 0.0
        if d2 == 0:
            break
        cn = c - f(c) / d2
        if cn > e and abs(f(cn)) <= abs(f(c)):
            c = cn
    return float(c)


def G_H(eqm: EquilibriumMeasure, V: Potential, a: float, x):
    """(G, H) with G = g - V + a x and H = -g + a x + ell."""
    g = _g_real(eqm, x)
    return g - V(x) + a * np.asarray(x), -g + a * np.asarray(x) + eqm.ell


def G_deriv(eqm, V, a, x, order):
    if order == 0:
        return G_H(eqm, V, a, x)[0]
    out = g_deriv(eqm, x, order) - V(x, order)
    return out + a if order == 1 else out


def x_horizon(eqm, V, a) -> float:
    """Point beyond which G'(.; a) < -1 for good."""
    e = eqm.b2
    d2 = V.deriv_coeffs(2)
    roots = np.roots(d2[::-1]) if len(d2) > 1 else np.array([])
    real = roots[np.abs(roots.imag) < 1e-9].real
    x = max([e] + list(real)) + 1.0
    target = a + 0.5 * V(e, 1) + 1.0
    it = 0
    while V(x, 1) <= target:
        x = e + 2 * (x - e)
        it += 1
        if it > 200:
            raise SearchHorizonExceeded("could not bound the maximizers of G")
    return float(x)


def _scan_grid(c, xhi, n=600):
    # geometric near c, then linear
    span = xhi - c
    g1 = c + np.geomspace(1e-9 * max(span, 1), 0.05 * span, n // 3)
    g2 = np.linspace(c + 0.05 * span, xhi, n - n // 3)
    return np.concatenate([[c], g1, g2])


def local_maxima(eqm, V, a, c=None):
    """Interior local maxima of G(.; a) on (c(a), x_hi), polished roots of G'."""
    if c is None:
        c = c_of_a(eqm, V, a)
    xhi = x_horizon(eqm, V, a)
    if xhi <= c:
        return []  # G' < 0 on all of (c, inf)
    xs = _scan_grid(c, xhi)
    gp = _Gprime(eqm, V, a, xs)
    f = lambda x: float(_Gprime(eqm, V, a, x))
    out = []
    for i in range(len(xs) - 1):
        if gp[i] > 0 and gp[i + 1] <= 0:
            if gp[i + 1] == 0:
                out.append(float(xs[i + 1]))
                continue
            out.append(brentq(f, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return out


def _in_AV(eqm, V, a) -> bool:
    c = c_of_a(eqm, V, a)
    Hc = G_H(eqm, V, a, c)[1]
    ms = local_maxima(eqm, V, a, c)
    if not ms:
        return False
    return float(max(G_H(eqm, V, a, np.array(ms))[0])) > float(Hc)


def critical_value(eqm: EquilibriumMeasure, V: Potential, tol: float = 1e-12) -> float:
    """a_c = inf of the spikes for which some x > c(a) has G(x; a) > H(c(a); a).

    Every a > V'(e)/2 qualifies, so a_c lies in (0, V'(e)/2]. Below that value a
    qualifying point has to be an interior local maximum of G, which keeps the
    predicate robust where G - H is only a few ulps from zero.
    """
    hi = 0.5 * V(eqm.b2, 1)
    lo = hi * 1e-6
    if _in_AV(eqm, V, lo):
        raise SearchHorizonExceeded("predicate already true at the lower search bound")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _in_AV(eqm, V, mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


def _order_2k(eqm, V, a, x, max_order=10):
    for j in range(2, max_order + 1):
        d = float(G_deriv(eqm, V, a, x, j))
        if abs(d) > ZERO_DERIV:
            return j, d
    return max_order, 0.0


def maximizers(eqm: EquilibriumMeasure, V: Potential, a: float, tie_tol: float = TIE_TOL):
    """Global maximizers of G(.; a) on [c(a), inf) within tie_tol, with derivative orders."""
    ms = local_maxima(eqm, V, a)
    if not ms:
        raise NoInteriorMaximum("G has no interior maximum beyond c(a); is a <= a_c?")
    Gs = np.array([float(G_H(eqm, V, a, x)[0]) for x in ms])
    gmax = Gs.max()
    out = []
    for x, G in zip(ms, Gs):
        if G >= gmax - tie_tol:
            k2, _ = _order_2k(eqm, V, a, x)
            out.append((float(x), float(G), int(k2)))
    return out


@dataclass
class PhaseReport:
    a: float
    regime: str
    c_of_a: float
    e: float
    maximizers: list = field(default_factory=list)
    g_max: float = float("nan")
    h_at_c: float = float("nan")
    a_c: float = float("nan")

    @property
    def location(self) -> float:
        if self.regime in (SUBCRITICAL, AT_CRITICAL):
            return self.e
        return self.maximizers[0][0] if self.maximizers else float("nan")

    def to_dict(self) -> dict:
        return {"a": self.a, "regime": self.regime, "c_of_a": self.c_of_a, "e": self.e,
                "maximizers": [list(m) for m in self.maximizers], "g_max": self.g_max,
                "h_at_c": self.h_at_c, "a_c": self.a_c}


def classify(eqm: EquilibriumMeasure, V: Potential, a: float, a_c: float | None = None,
             tie_tol: float = TIE_TOL, at_tol: float = 1e-9) -> PhaseReport:
    if not a > 0:
        raise NonpositiveSpike("spike a must be positive")
    if a_c is None:
        a_c = critical_value(eqm, V)
    c = c_of_a(eqm, V, a)
    Hc = float(G_H(eqm, V, a, c)[1])
    e = eqm.b2
    half = 0.5 * V(e, 1)
    if abs(a - a_c) <= at_tol:
        ms = local_maxima(eqm, V, a, c)
        if abs(a_c - half) <= at_tol and len(ms) <= 1:
            return PhaseReport(a, AT_CRITICAL, c, e, [], Hc, Hc, a_c)
        return PhaseReport(a, UNRESOLVED, c, e, [], float("nan"), Hc, a_c)
    if a < a_c:
        return PhaseReport(a, SUBCRITICAL, c, e, [], Hc, Hc, a_c)
    mx = maximizers(eqm, V, a, tie_tol)
    regime = SECONDARY if len(mx) >= 2 else SUPERCRITICAL
    return PhaseReport(a, regime, c, e, mx, max(m[1] for m in mx), Hc, a_c)


def asymptotic_log_density(eqm: EquilibriumMeasure, V: Potential, a: float, u):
    """Exponent rate of the largest-eigenvalue density at u > e."""
    u = np.asarray(u, dtype=float)
    e = eqm.b2
    if np.any(u <= e):
        raise AtEdge("u must lie strictly to the right of the edge")
    c = c_of_a(eqm, V, a)
    G, _ = G_H(eqm, V, a, u)
    Hc = G_H(eqm, V, a, c)[1]
    sub = Hc + (-V(u) + 2 * _g_real(eqm, u) - eqm.ell)
    out = np.where(u > c, G, sub)
    return out[()] if out.ndim == 0 else out


def find_secondary_critical(eqm: EquilibriumMeasure, V: Potential, a_lo: float, a_hi: float,
                            n_scan: int = 200) -> float:
    """A spike a0 in (a_lo, a_hi) where the two largest local maxima of G tie."""

    def diff(a):
        ms = local_maxima(eqm, V, a)
        if len(ms) < 2:
            return None
        G = G_H(eqm, V, a, np.array(ms))[0]
        return float(G[-1] - G[-2])

    grid = np.linspace(a_lo, a_hi, n_scan)
    prev = None
    for a in grid:
        d = diff(a)
        if d is not None and prev is not None and prev[1] * d < 0:
            def f(t):
                v = diff(t)
                if v is None:
                    raise InputError("lost the second local maximum while bracketing")
                return v
            return float(brentq(f, prev[0], a, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        prev = (a, d) if d is not None else None
    raise SearchHorizonExceeded("no tie between two local maxima in the scanned range")
