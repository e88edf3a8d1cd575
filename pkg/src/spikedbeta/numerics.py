"""Quadrature kernels: Gauss-Chebyshev rules, Chebyshev-based principal values,
and Gauss-Legendre integration along piecewise-straight contours."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import (EvaluationPointOutsideOpenInterval, InputError, NonFiniteIntegrand,
                     NonSmoothInput, TailNotDecaying)

PV_MODES = 256
MU_NODES = 512
GL_POINTS = 32


@dataclass(frozen=True)
class ChebGrid:
    """Gauss-Chebyshev rule on [b1, b2].

    kind="first": nodes of T_m, weights for the weight 1/sqrt((b2-x)(x-b1)).
    kind="second": nodes of U_m, weights for sqrt((b2-x)(x-b1)).
    """
    b1: float
    b2: float
    m: int
    kind: str = "first"

    @property
    def t(self) -> np.ndarray:
        m = self.m
        if self.kind == "first":
            th = (2 * np.arange(m, 0, -1) - 1) * np.pi / (2 * m)
        else:
            th = np.arange(m, 0, -1) * np.pi / (m + 1)
        return np.cos(th)

    @property
    def nodes(self) -> np.ndarray:
        c, r = 0.5 * (self.b1 + self.b2), 0.5 * (self.b2 - self.b1)
        return c + r * self.t

    @property
    def weights(self) -> np.ndarray:
        m = self.m
        if self.kind == "first":
            return np.full(m, np.pi / m)
        r = 0.5 * (self.b2 - self.b1)
        th = np.arange(m, 0, -1) * np.pi / (m + 1)
        return np.pi / (m + 1) * np.sin(th) ** 2 * r * r

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def integrate_mu(f: Callable, eqm, m: int = MU_NODES) -> float:
    """Integral of f against the equilibrium measure.

    The sqrt factor of the density is carried by second-kind Chebyshev weights,
    so the rule is exact when f*h is a polynomial of degree <= 2m-1.
    """
    g = ChebGrid(eqm.b1, eqm.b2, m, "second")
    x = g.nodes
    vals = np.asarray(f(x)) * eqm.h(x)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteIntegrand("integrand is not finite on the support nodes")
    return float(np.dot(g.weights, vals)) / (2 * np.pi)


def cheb_coeffs(f: Callable, n: int = PV_MODES, check_decay: bool = False,
                tol: float = 1e-10) -> np.ndarray:
    """Chebyshev coefficients of f on [-1, 1] (interpolation at first-kind points)."""
    a = C.chebinterpolate(f, n - 1)
    if check_decay:
        scale = np.max(np.abs(a)) or 1.0
        if np.max(np.abs(a[-8:])) > tol * scale:
            raise NonSmoothInput("Chebyshev coefficients do not decay; input not smooth enough")
    return a


def cheb_U_sum(b: np.ndarray, x) -> np.ndarray:
    """sum_k b[k] U_k(x) for |x| < 1 via Clenshaw."""
    x = np.asarray(x, dtype=float)
    bk1 = np.zeros_like(x)
    bk2 = np.zeros_like(x)
    for bk in b[::-1]:
        bk1, bk2 = bk + 2 * x * bk1 - bk2, bk1
    return bk1


def pv_cauchy_coeffs(a: np.ndarray, x, weight: str = "inv_sqrt"):
    """PV integral of (sum a_k T_k(s)) w(s)/(s-x) over [-1, 1].

    Uses PV int T_k / ((s-x) sqrt(1-s^2)) = pi U_{k-1}(x); the sqrt weight is
    reduced to that case by multiplying the series with 1 - s^2.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1 - 1e-12):
        raise EvaluationPointOutsideOpenInterval("evaluation point must satisfy |x| < 1 - 1e-12")
    if weight == "sqrt":
        a = C.chebmul(a, [0.5, 0.0, -0.5])
    elif weight != "inv_sqrt":
        raise InputError(f"unknown weight {weight!r}")
    if len(a) < 2:
        return np.zeros_like(x)[()]
    out = np.pi * cheb_U_sum(a[1:], x)
    return out[()] if out.ndim == 0 else out


def pv_cauchy(f: Callable, x, weight: str = "inv_sqrt", n_modes: int = PV_MODES):
    """PV int_{-1}^{1} f(s) w(s) / (s - x) ds with w = 1/sqrt(1-s^2) or sqrt(1-s^2)."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1 - 1e-12):
        raise EvaluationPointOutsideOpenInterval("evaluation point must satisfy |x| < 1 - 1e-12")
    return pv_cauchy_coeffs(cheb_coeffs(f, n_modes), x, weight)


# ---------------------------------------------------------------------------
# contours

_E3 = np.exp(0.75j * np.pi)


@dataclass(frozen=True)
class ContourSpec:
    """One of the four contour families, anchored at a real point.

    params: (s1, s2) for Sigma, (s,) for Pi / Gamma / I. s may be inf for Gamma.
    truncation: length kept on infinite rays (None = automatic).
    """
    kind: str
    anchor: float
    params: tuple
    truncation: float | None = None

    def __post_init__(self):
        if self.kind not in ("Sigma", "Pi", "Gamma", "I"):
            raise InputError(f"unknown contour kind {self.kind!r}")
        if any(not p > 0 for p in self.params):
            raise InputError("contour parameters must be positive")
        if self.kind == "Sigma":
            s1, s2 = self.params
            if not s2 > s1 / math.sqrt(2):
                raise InputError("Sigma contour needs s2 > s1/sqrt(2)")

    def segments(self) -> list[tuple[complex, complex, float]]:
        """Upper half (t >= 0) as straight pieces (start, unit direction, length)."""
        x = complex(self.anchor)
        inf = math.inf
        if self.kind == "Sigma":
            s1, s2 = self.params
            p1 = x + _E3 * s1
            return [(x, _E3, s1), (p1, 1j, s2 - s1 / math.sqrt(2)),
                    (x - s1 / math.sqrt(2) + 1j * s2, -1.0 + 0j, inf)]
        if self.kind == "Pi":
            (s,) = self.params
            return [(x, 1j, s), (x + 1j * s, -1.0 + 0j, inf)]
        if self.kind == "Gamma":
            (s,) = self.params
            return [(x, _E3, s)]
        (s,) = self.params
        return [(x, 1j, s)]


_GL_CACHE: dict = {}


def gauss_legendre(m: int):
    if m not in _GL_CACHE:
        _GL_CACHE[m] = np.polynomial.legendre.leggauss(m)
    return _GL_CACHE[m]


def _panel_sum(fun, lo, hi, m):
    """Composite GL on the panels [lo_i, hi_i]; returns per-panel integrals."""
    t, w = gauss_legendre(m)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * t[None, :]
    vals = fun(pts.ravel()).reshape(pts.shape)
    return (vals * w[None, :]).sum(axis=1) * half


def adaptive_panels(fun, edges: Sequence[float], m: int = GL_POINTS, rtol: float = 1e-14,
                    max_level: int = 40) -> complex:
    """Adaptive composite Gauss-Legendre of fun over the union of panels given by edges.

    A panel is accepted when its m-point value agrees with the two half-panel
    values to within rtol times the running total.
    """
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    coarse = _panel_sum(fun, lo, hi, m)
    scale = np.abs(coarse).sum()
    total = 0.0 + 0.0j
    accepted = []
    for _ in range(max_level):
        mid = 0.5 * (lo + hi)
        left = _panel_sum(fun, lo, mid, m)
        right = _panel_sum(fun, mid, hi, m)
        fine = left + right
        scale = max(scale, np.abs(fine).sum() + sum(abs(v) for v in accepted))
        ok = np.abs(fine - coarse) <= rtol * max(scale, 1e-300)
        accepted.extend(fine[ok].tolist())
        if ok.all():
            break
        bad = ~ok
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
        order = np.argsort(lo, kind="stable")
        lo, hi, coarse = lo[order], hi[order], coarse[order]
    else:
        accepted.extend(coarse.tolist())
    # fixed-order reduction for bit-stable output
    for v in sorted(accepted, key=lambda z: (abs(z), z.real, z.imag)):
        total += v
    return total


def _ray_length(gw, start, d, tail_tol, max_len=1e20):
    """Length along a ray after which |g| stays below tail_tol times its max so far."""
    ts = np.concatenate([[0.0], np.geomspace(1e-3, max_len, 400)])
    vals = np.abs(gw(start + d * ts))
    peak = np.nanmax(vals)
    below = vals <= tail_tol * peak
    # last index where we are above the threshold
    above = np.nonzero(~below)[0]
    if len(above) == 0:
        return ts[1]
    k = above[-1]
    if k + 1 >= len(ts):
        raise TailNotDecaying("integrand does not decay along the ray")
    return float(ts[k + 1])


def contour_integral(g: Callable, spec: ContourSpec, m: int = GL_POINTS,
                     symmetric: bool = False, rtol: float = 1e-14,
                     tail_tol: float = 1e-16) -> complex:
    """(1/2 pi i) times the integral of g along the contour, lower half traversed
    first (from the far lower-left, through the anchor, to the upper-left).

    With symmetric=True the integrand is assumed to satisfy g(conj w) = conj g(w)
    and only the upper half is evaluated; the result is then exactly real.
    """
    segs = spec.segments()
    up = 0.0 + 0.0j
    lo_part = 0.0 + 0.0j
    for start, d, length in segs:
        if math.isinf(length):
            if spec.truncation is not None:
                length = float(spec.truncation)
                tail = np.abs(g(np.array([start + d * length])))[0]
                peak = np.abs(g(np.array([start]))).max()
                if tail > max(tail_tol * 1e4, 1e-12) * max(peak, 1e-300):
                    raise TailNotDecaying(
                        f"|g| at truncation ({tail:.3e}) is not small relative to {peak:.3e}")
            else:
                length = _ray_length(g, start, d, tail_tol)
            edges = np.concatenate([[0.0], np.geomspace(min(1.0, length) / 64, length, 48)])
            edges = np.unique(edges)
        else:
            edges = np.linspace(0.0, length, 5)

        def f_up(t, start=start, d=d):
            return g(start + d * t) * d

        up += adaptive_panels(f_up, edges, m, rtol)
        if not symmetric:
            def f_lo(t, start=start, d=d):
                return g(np.conj(start + d * t)) * np.conj(d)
            lo_part += adaptive_panels(f_lo, edges, m, rtol)
    if symmetric:
        return complex(up.imag / np.pi, 0.0)
    return (up - lo_part) / (2j * np.pi)
