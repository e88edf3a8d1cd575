"""Predicted limit laws for the largest eigenvalue above the critical spike.

Covers the Gaussian and flat 2k laws at a unique maximizer, the Gaussian mixture
at a secondary critical spike, and the Gaussian / flat-2k mixture on the
log n / n scale. The prefactor M_beta needs the signed measure nu for beta != 2;
it is a plug-in here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import integrate, special

from . import phase
from .equilibrium import EquilibriumMeasure, g_complex, stieltjes
from .errors import (DegenerateGap, IndexOutOfRange, InputError, NuRequired, OutsideDomain,
                     SubcriticalUnsupported)
from .numerics import PV_MODES, cheb_coeffs, integrate_mu, pv_cauchy_coeffs
from .potential import Potential

GAUSSIAN = "Gaussian"
FLAT2K = "Flat2k"


# ---------------------------------------------------------------------------
# quadratic functional

def _mapped_coeffs(f: Callable, eqm: EquilibriumMeasure, n_modes: int, check: bool = True):
    c, r = eqm.center, eqm.radius
    return cheb_coeffs(lambda t: f(c + r * t), n_modes, check_decay=check)


def delta_f(f: Callable, eqm: EquilibriumMeasure, x, n_modes: int = PV_MODES):
    """delta^f(x) = -(1/2pi^2) (1/sqrt((x-b1)(b2-x))) PV int f'(s) sqrt((s-b1)(b2-s)) / (s-x) ds."""
    c, r = eqm.center, eqm.radius
    a = _mapped_coeffs(f, eqm, n_modes)
    t = (np.asarray(x, dtype=float) - c) / r
    pv = pv_cauchy_coeffs(C.chebder(a), t, "sqrt")  # in mapped units; the factors of r cancel
    return -pv / (2 * np.pi ** 2 * r * np.sqrt(1 - t * t))


def quadratic_A(f: Callable, eqm: EquilibriumMeasure, fprime: Callable | None = None,
                n_modes: int = PV_MODES) -> float:
    """A(f) = 1/2 int_J f delta^f dx.

    After mapping J to [-1, 1] this is -(1/4pi^2) int F(t)/sqrt(1-t^2) PV(t) dt with
    PV(t) = PV int F'(s) sqrt(1-s^2)/(s-t) ds; the outer integral uses a
    Gauss-Chebyshev rule that is exact for the polynomial integrand.
    """
    c, r = eqm.center, eqm.radius
    a = _mapped_coeffs(f, eqm, n_modes)
    if fprime is not None:
        da = r * _mapped_coeffs(fprime, eqm, n_modes)
    else:
        da = C.chebder(a)
    m = n_modes + 1
    th = (2 * np.arange(1, m + 1) - 1) * np.pi / (2 * m)
    t = np.cos(th)
    pv = pv_cauchy_coeffs(da, t, "sqrt")
    F = C.chebval(t, a)
    return float(-(np.pi / m) * np.dot(F, pv) / (4 * np.pi ** 2))


def inner_A(f: Callable, g: Callable, eqm: EquilibriumMeasure, n_modes: int = PV_MODES) -> float:
    fg = lambda x: f(x) + g(x)
    return 0.5 * (quadratic_A(fg, eqm, n_modes=n_modes) - quadratic_A(f, eqm, n_modes=n_modes)
                  - quadratic_A(g, eqm, n_modes=n_modes))


# ---------------------------------------------------------------------------
# nu plug-in and the prefactor

@dataclass(frozen=True)
class NuMeasure:
    """Signed measure given through its action f -> int f dnu."""
    integrate: Callable[[Callable], float]
    name: str = "user"
    partial: bool = False


NU_ZERO = NuMeasure(lambda f: 0.0, name="zero", partial=True)


def _p_of_u(V: Potential, u: float):
    return lambda x: -V(x) + np.log(u - x)


def log_R_beta(eqm: EquilibriumMeasure, V: Potential, u: float, beta: float,
               nu: NuMeasure | None = None) -> float:
    """log R_beta(u) = (beta/2)[(2/beta - 1) int p dnu - int p dmu + A(p)], p = -V + log(u - x)."""
    p = _p_of_u(V, u)
    int_mu = -integrate_mu(lambda x: V(x), eqm) + float(np.real(g_complex(eqm, u + 0j)))
    A = quadratic_A(p, eqm)
    nu_term = 0.0
    if beta != 2:
        nu_term = (2 / beta - 1) * float(nu.integrate(p))
    return 0.5 * beta * (nu_term - int_mu + A)


def M_beta_details(eqm: EquilibriumMeasure, V: Potential, a: float, u: float, beta: float = 2.0,
                   nu: NuMeasure | None = None, c: float | None = None) -> dict:
    if c is None:
        c = phase.c_of_a(eqm, V, a)
    if not u > c:
        raise OutsideDomain(f"u={u} must exceed c(a)={c}")
    if beta != 2 and nu is None:
        raise NuRequired("beta != 2 needs a NuMeasure plug-in")
    logR = log_R_beta(eqm, V, u, beta, nu)
    bracket = 0.5 * beta * (a - float(np.real(stieltjes(eqm, u + 0j))))
    logM = logR + (0.5 * beta - 1) * math.log(bracket) + math.lgamma(0.5 * beta)
    return {"value": math.exp(logM), "log_value": logM, "log_R": logR, "bracket": bracket,
            "partial": bool(beta != 2 and nu.partial)}


def M_beta_prefactor(eqm: EquilibriumMeasure, V: Potential, a: float, u: float,
                     beta: float = 2.0, nu: NuMeasure | None = None) -> float:
    """M_beta(u) = R_beta(u) [(beta/2)(a - int dmu/(u-x))]^{beta/2-1} Gamma(beta/2)."""
    return M_beta_details(eqm, V, a, u, beta, nu)["value"]


# ---------------------------------------------------------------------------
# laws

def flat_normalizer(k: int) -> float:
    """int e^{-xi^{2k}} dxi over R, i.e. Gamma(1/2k)/k, cross-checked by quadrature."""
    closed = math.gamma(1.0 / (2 * k)) / k
    num = 2 * integrate.quad(lambda x: math.exp(-x ** (2 * k)), 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    if abs(num - closed) > 1e-9 * closed:
        raise AssertionError("flat-law normalizer mismatch")
    return closed


def flat_cdf(T, k: int):
    T = np.asarray(T, dtype=float)
    out = 0.5 + 0.5 * np.sign(T) * special.gammainc(1.0 / (2 * k), np.abs(T) ** (2 * k))
    return out[()] if out.ndim == 0 else out


def std_normal_cdf(T):
    return special.ndtr(T)


@dataclass
class Component:
    location: float
    k: int
    scale_nfree: float  # scale at n = 1; per-n scale is scale_nfree * n^{-1/(2k)}
    kind: str
    weight: float

    def scale(self, n: float) -> float:
        return self.scale_nfree * n ** (-1.0 / (2 * self.k))

    def cdf_std(self, T):
        return std_normal_cdf(T) if self.kind == GAUSSIAN else flat_cdf(T, self.k)

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class LimitLaw:
    components: list
    beta: float
    n_shift: tuple | None = None  # (q_beta, alpha)
    alpha: float | None = None
    partial: bool = False
    meta: dict = field(default_factory=dict)

    def cdf(self, x, n: float):
        """Mixture CDF at physical location x for matrix size n."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in self.components:
            out = out + c.weight * c.cdf_std((x - c.location) / c.scale(n))
        return out[()] if out.ndim == 0 else out

    def to_dict(self):
        return {"components": [c.to_dict() for c in self.components], "beta": self.beta,
                "n_shift": list(self.n_shift) if self.n_shift else None, "alpha": self.alpha,
                "partial": self.partial, "meta": self.meta}


def law_cdf(law: LimitLaw, i: int, T: float) -> float:
    """sum_{j<i} w_j + w_i F_i(T) with T in the standardized variable of component i."""
    if not 0 <= i < len(law.components):
        raise IndexOutOfRange(f"component index {i} out of range")
    prev = sum(c.weight for c in law.components[:i])
    c = law.components[i]
    return float(prev + c.weight * c.cdf_std(T))


def q_beta(beta: float, k: int, x1: float, x2: float) -> float:
    if not x2 > x1:
        raise DegenerateGap("need x2 > x1")
    return (2.0 / beta) * (0.5 - 1.0 / (2 * k)) / (x2 - x1)


def _scale_nfree(beta, k, d2k):
    if k == 1:
        return 1.0 / math.sqrt(0.5 * beta * abs(d2k))
    return (0.5 * beta * abs(d2k) / math.factorial(2 * k)) ** (-1.0 / (2 * k))


def mixture_log_weights(beta: float, alpha: float, xs, ks, d2ks, log_M) -> np.ndarray:
    """log B_i (all k_i = 1) or log D_i (some k_i > 1), normalisation left to the caller."""
    out = []
    for x, k, d, lm in zip(xs, ks, d2ks, log_M):
        lw = 0.5 * beta * alpha * x + lm
        if k == 1:
            lw += 0.5 * math.log(2 * math.pi / (0.5 * beta * abs(d)))
        else:
            lw += (math.log(math.factorial(2 * k)) - math.log(0.5 * beta * abs(d))) / (2 * k)
            lw += math.log(flat_normalizer(k))
        out.append(lw)
    return np.array(out)


def normalize_log_weights(lw) -> np.ndarray:
    lw = np.asarray(lw, dtype=float)
    w = np.exp(lw - lw.max())
    return w / w.sum()


def predict_limit(eqm: EquilibriumMeasure, V: Potential, a: float, beta: float = 2.0,
                  alpha: float | None = None, nu: NuMeasure | None = None,
                  a_c: float | None = None, tie_tol: float = phase.TIE_TOL) -> LimitLaw:
    rep = phase.classify(eqm, V, a, a_c=a_c, tie_tol=tie_tol)
    if rep.regime not in (phase.SUPERCRITICAL, phase.SECONDARY):
        raise SubcriticalUnsupported(f"no limit law implemented for regime {rep.regime}")
    comps = []
    d2ks = []
    for x, _, k2 in rep.maximizers:
        k = k2 // 2
        d = float(phase.G_deriv(eqm, V, a, x, k2))
        d2ks.append(d)
        comps.append(Component(x, k, _scale_nfree(beta, k, d), GAUSSIAN if k == 1 else FLAT2K, 1.0))
    meta = {"regime": rep.regime, "a": a, "a_c": rep.a_c, "c_of_a": rep.c_of_a}
    if len(comps) == 1:
        return LimitLaw(comps, beta, meta=meta)

    alpha = 0.0 if alpha is None else float(alpha)
    if beta != 2 and nu is None:
        nu = NU_ZERO
    partial = bool(beta != 2 and nu.partial)
    logM = [M_beta_details(eqm, V, a, c.location, beta, nu, rep.c_of_a)["log_value"] for c in comps]
    ks = [c.k for c in comps]
    lw = mixture_log_weights(beta, alpha, [c.location for c in comps], ks, d2ks, logM)
    w = normalize_log_weights(lw)
    for c, wi in zip(comps, w):
        c.weight = float(wi)
    n_shift = None
    if any(k > 1 for k in ks):
        if len(comps) != 2 or ks[0] != 1:
            raise InputError("only the two-point pattern (Gaussian, flat 2k) is supported")
        n_shift = (q_beta(beta, ks[1], comps[0].location, comps[1].location), alpha)
    meta["log_weights"] = lw.tolist()
    return LimitLaw(comps, beta, n_shift=n_shift, alpha=alpha, partial=partial, meta=meta)
