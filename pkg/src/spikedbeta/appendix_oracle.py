"""Closed form vs quadrature checks behind the beta = 2 prefactor, and a Monte Carlo
spot-check of the partition-function asymptotics it enters."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from . import limit_laws as LL
from .equilibrium import EquilibriumMeasure, stieltjes
from .errors import DomainViolation, IndicatorStarvation, InputError, SupportNotNormalized
from .numerics import PV_MODES, cheb_coeffs, integrate_mu, pv_cauchy, pv_cauchy_coeffs
from .potential import Potential


@dataclass
class OracleReport:
    name: str
    closed_form: float
    numeric: float
    abs_err: float
    rel_err: float
    passed: bool
    tol: float = 1e-8
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def make_report(name, closed, numeric, tol, note="", absolute=False) -> OracleReport:
    ae = abs(closed - numeric)
    re = ae / abs(closed) if closed != 0 else math.inf
    ok = (ae if absolute or closed == 0 else re) <= tol
    return OracleReport(name, float(closed), float(numeric), float(ae), float(re), bool(ok), tol, note)


def _check_us(u, s):
    if not (u > 1 and -1 < s < 1):
        raise DomainViolation("need u > 1 and |s| < 1")


# ---------------------------------------------------------------------------
# the two principal-value kernels

def F_closed(u, s):
    return math.pi / math.sqrt(1 - s * s) * (math.asin(s) - math.asin((u * s - 1) / (u - s)))


def F_us(u: float, s: float, n_modes: int = PV_MODES):
    """PV int_{-1}^{1} log(u - x) / ((s - x) sqrt(1 - x^2)) dx: (closed, numeric)."""
    _check_us(u, s)
    # pv_cauchy integrates f(x) w(x) / (x - s)
    num = -float(pv_cauchy(lambda x: np.log(u - x), s, "inv_sqrt", n_modes))
    return F_closed(u, s), num


def G_closed(u, s):
    r = math.sqrt(u * u - 1)
    q = math.sqrt(1 - s * s)
    return math.pi * (r - u + s * math.log((u + r) / 2) - q * math.atan((s * u - 1) / (q * r))
                      + q * math.atan(s / q))


def G_us(u: float, s: float, n_modes: int = PV_MODES):
    """PV int_{-1}^{1} log(u - x) sqrt(1 - x^2) / (s - x) dx: (closed, numeric)."""
    _check_us(u, s)
    num = -float(pv_cauchy(lambda x: np.log(u - x), s, "sqrt", n_modes))
    return G_closed(u, s), num


def dG_du_closed(u, s):
    """d/du G(u, s) = PV int sqrt(1-x^2) / ((u-x)(s-x)) dx, by partial fractions."""
    # 1/((u-x)(s-x)) = [1/(s-x) - 1/(u-x)] / (u - s)
    r = math.sqrt(u * u - 1)
    pv_s = math.pi * s           # PV int sqrt(1-x^2)/(s-x) dx
    reg_u = math.pi * (u - r)    # int sqrt(1-x^2)/(u-x) dx
    return (pv_s - reg_u) / (u - s)


# ---------------------------------------------------------------------------
# arcsin integrals

def arcsin_closed(u: float) -> float:
    """int_{-1}^{1} arcsin(s)/(u-s) ds = -(pi/2) log(u^2-1) + pi log((u + sqrt(u^2-1))/2)."""
    r = math.sqrt(u * u - 1)
    return -0.5 * math.pi * math.log(u * u - 1) + math.pi * math.log((u + r) / 2)


def arcsin_printed(u: float) -> float:
    # the form with +(pi/2) log(u^2 - 1); kept for the report only
    r = math.sqrt(u * u - 1)
    return 0.5 * math.pi * math.log(u * u - 1) + math.pi * math.log((u + r) / 2)


def _theta_quad(f, tol):
    # s = sin(theta) removes the square-root endpoint behaviour
    val, _ = integrate.quad(lambda th: f(math.sin(th)) * math.cos(th), -math.pi / 2, math.pi / 2,
                            epsabs=0, epsrel=tol * 1e-2, limit=400)
    return val


def arcsin_integrals(u: float, tol: float | None = None):
    if not u > 1:
        raise DomainViolation("need u > 1")
    if tol is None:
        tol = 1e-9 if u - 1 > 0.05 else 1e-7
    c1 = arcsin_closed(u)
    n1 = _theta_quad(lambda s: math.asin(s) / (u - s), tol)
    c2 = -c1
    n2 = _theta_quad(lambda s: math.asin(max(-1.0, min(1.0, (u * s - 1) / (u - s)))) / (u - s), tol)
    note = f"printed form with +(pi/2)log(u^2-1) differs by {arcsin_printed(u) - c1:.6g}"
    return (make_report(f"arcsin_integral_u={u}", c1, n1, tol, note),
            make_report(f"arcsin_companion_u={u}", c2, n2, tol))


# ---------------------------------------------------------------------------
# three-factor decomposition of M_2 on J = [-1, 1]

def _gc_rule(m):
    th = (2 * np.arange(1, m + 1) - 1) * np.pi / (2 * m)
    return np.cos(th), np.pi / m


def _outer_inv_sqrt(f_vals_fn, inner_fn, m):
    """int_{-1}^{1} f(x)/sqrt(1-x^2) inner(x) dx by Gauss-Chebyshev."""
    x, w = _gc_rule(m)
    return w * float(np.dot(f_vals_fn(x), inner_fn(x)))


def _pv_sx(fn, x, weight, n_modes):
    """PV int g(s) w(s) / (s - x) ds at the points x."""
    return pv_cauchy_coeffs(cheb_coeffs(fn, n_modes), x, weight)


def m2_factors(eqm: EquilibriumMeasure, V: Potential, u: float, n_modes: int = PV_MODES) -> dict:
    """The three exponential factors of M_2(u), each by nested principal-value quadrature."""
    if abs(eqm.b1 + 1) > 1e-9 or abs(eqm.b2 - 1) > 1e-9:
        raise SupportNotNormalized(f"support is [{eqm.b1}, {eqm.b2}], expected [-1, 1]")
    if not u > 1:
        raise DomainViolation("need u > 1")
    m = n_modes + 1
    k = 1.0 / (4 * math.pi ** 2)
    Vf = lambda x: V(x)
    dV = lambda s: V(s, 1)
    logu = lambda x: np.log(u - x)
    inner_dV = lambda x: _pv_sx(dV, x, "sqrt", n_modes)
    inner_u = lambda x: _pv_sx(lambda s: 1.0 / (u - s), x, "sqrt", n_modes)

    e1 = integrate_mu(Vf, eqm) - k * _outer_inv_sqrt(Vf, inner_dV, m)
    e2 = (k * _outer_inv_sqrt(logu, inner_dV, m) - k * _outer_inv_sqrt(Vf, inner_u, m)
          - integrate_mu(logu, eqm))
    e3 = k * _outer_inv_sqrt(logu, inner_u, m)
    return {"log_factor1": e1, "log_factor2": e2, "log_factor3": e3,
            "factor1": math.exp(e1), "factor2": math.exp(e2), "factor3": math.exp(e3)}


def gamma_u(u, b1=-1.0, b2=1.0):
    return ((u - b1) / (u - b2)) ** 0.25


def M2_decomposition_check(eqm: EquilibriumMeasure, V: Potential, us=(1.2, 1.5, 2.0, 3.0),
                           tol_factor: float = 1e-8, tol_product: float = 1e-6,
                           tol_const: float = 1e-5) -> list:
    reps = []
    Cs = []
    a_big = 0.5 * V(eqm.b2, 1) + 1.0  # any a with c(a) = e; the beta = 2 prefactor ignores a
    for u in us:
        f = m2_factors(eqm, V, u)
        g = gamma_u(u)
        reps.append(make_report(f"factor2_u={u}", 2 * (u - math.sqrt(u * u - 1)), f["factor2"], tol_factor))
        reps.append(make_report(f"factor3_u={u}", 0.5 * (g + 1 / g), f["factor3"], tol_factor))
        prod = f["factor1"] * f["factor2"] * f["factor3"]
        M2 = LL.M_beta_prefactor(eqm, V, a_big, u, beta=2.0)
        reps.append(make_report(f"product_vs_prefactor_u={u}", M2, prod, tol_product))
        reps.append(make_report(f"factor2x3_vs_gamma_u={u}", g - 1 / g, f["factor2"] * f["factor3"], tol_factor))
        Cs.append(M2 / (g - 1 / g))
    C0 = Cs[0]
    for u, C in zip(us[1:], Cs[1:]):
        reps.append(make_report(f"C_constant_u={us[0]}_vs_{u}", C0, C, tol_const))
    return reps


# ---------------------------------------------------------------------------
# Monte Carlo check of the partition-function asymptotics (beta = 2, quadratic V)

def log_R2(eqm: EquilibriumMeasure, V: Potential, u: float, w0: float | None = None) -> float:
    """log R_2(u, w0) = A(p) - int p dmu with p = -V + 2 log(u-x) - log|w0-x| (w0 = u by default)."""
    w0 = u if w0 is None else w0
    p = lambda x: -V(x) + 2 * np.log(u - x) - np.log(np.abs(w0 - x))
    return LL.quadratic_A(p, eqm) - integrate_mu(p, eqm)


def _gue_eigs(m: int, count: int, scale: float, rng: np.random.Generator, batch: int = 20000):
    """Eigenvalues of count draws from the density prop. to exp(-scale m Tr M^2), Hermitian m x m."""
    out = []
    done = 0
    while done < count:
        b = min(batch, count - done)
        s = math.sqrt(1 / (4 * m * scale))
        A = rng.normal(0, s, (b, m, m)) + 1j * rng.normal(0, s, (b, m, m))
        A = np.triu(A, 1)
        A = A + np.conj(np.swapaxes(A, 1, 2))
        idx = np.arange(m)
        A[:, idx, idx] = rng.normal(0, math.sqrt(1 / (2 * m * scale)), (b, m))
        out.append(np.linalg.eigvalsh(A))
        done += b
    return np.concatenate(out)


def Z_asymptotics_spotcheck(eqm: EquilibriumMeasure, V: Potential, u: float, n: int, mode: str = "a",
                            z: complex = 1.0, w0: float | None = None, t: float = 0.0,
                            mc_samples: int = 100000, seed: int = 0, min_accept: float = 1e-3) -> dict:
    """Monte Carlo E_{n-1}[prod e^{-V}(u-x)^2/(w-x) 1{max x < u}] vs its large-n form.

    mode "a": w = u + z/n.  mode "c": w = w0 + i t / sqrt(n).
    """
    if V.degree != 2 or any(c != 0 for c in V.coeffs[:2]):
        raise InputError("the spot-check samples the reference measure exactly, which needs V = c x^2")
    if not u > eqm.b2:
        raise DomainViolation("need u > e")
    if n > 32:
        raise InputError("n <= 32 for this check")
    m = n - 1
    if mode == "a":
        w = u + complex(z) / n
    elif mode == "c":
        if w0 is None or not w0 > u:
            raise InputError("mode c needs w0 > u")
        w = w0 + 1j * t / math.sqrt(n)
    else:
        raise InputError("mode must be 'a' or 'c'")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, n])))
    lam = _gue_eigs(m, mc_samples, V.coeffs[2], rng)
    ok = lam.max(axis=1) < u
    frac = float(ok.mean())
    if frac < min_accept:
        raise IndicatorStarvation(f"indicator acceptance {frac} below {min_accept}")
    logP = (-V(lam) + 2 * np.log(np.where(ok[:, None], u - lam, 1.0)) - np.log(w - lam + 0j)).sum(axis=1)
    P = np.where(ok, np.exp(logP), 0)
    est = complex(P.mean())
    se = float(np.sqrt(np.var(P.real) + np.var(P.imag)) / math.sqrt(len(P)))

    if mode == "a":
        p_mu = -integrate_mu(lambda x: V(x), eqm) + integrate_mu(lambda x: np.log(u - x), eqm)
        lead = -complex(z) * complex(stieltjes(eqm, u + 0j))
        rhs = np.exp(lead + log_R2(eqm, V, u) + n * p_mu)
    else:
        p_mu = integrate_mu(lambda x: -V(x) + 2 * np.log(u - x) - np.log(w0 - x), eqm)
        s1 = integrate_mu(lambda x: 1.0 / (w0 - x), eqm)
        s2 = integrate_mu(lambda x: 1.0 / (w0 - x) ** 2, eqm)
        lead = -0.5 * t * t * s2 - 1j * t * math.sqrt(n) * s1
        rhs = np.exp(lead + log_R2(eqm, V, u, w0) + n * p_mu)
    rel = abs(est - rhs) / abs(rhs)
    return {"mode": mode, "n": n, "u": u, "w": [w.real, w.imag], "mc_samples": mc_samples, "seed": seed,
            "estimate": [est.real, est.imag], "std_error": se, "prediction": [rhs.real, rhs.imag],
            "rel_err": float(rel), "rel_se": se / abs(rhs), "indicator_rate": frac}


def mapped_potential(V: Potential, eqm: EquilibriumMeasure) -> Potential:
    """V(center + radius t), whose equilibrium support is [-1, 1]."""
    from numpy.polynomial import polynomial as P
    from .potential import make_potential
    out = np.zeros(1)
    lin = np.array([eqm.center, eqm.radius])
    for c in reversed(V.coeffs):
        out = P.polyadd(P.polymul(out, lin), [c])
    return make_potential(out)


def run_all(seed: int = 0) -> list:
    """Every closed-form check, on V = 2x^2 and on the reference quartic mapped to [-1, 1]."""
    from .equilibrium import solve_equilibrium
    from .potential import REFERENCE_QUARTIC, make_potential
    reps = []
    for (u, s) in [(1.5, 0.3), (2.0, 0.5), (2.0, 0.0), (3.0, -0.7), (1.2, 0.9)]:
        c, nmr = F_us(u, s)
        reps.append(make_report(f"F_u={u}_s={s}", c, nmr, 1e-8))
        c, nmr = G_us(u, s)
        reps.append(make_report(f"G_u={u}_s={s}", c, nmr, 1e-8))
    for u in (1.01, 1.5, 2.0, 5.0):
        reps.extend(arcsin_integrals(u))
    V = make_potential([0.0, 0.0, 2.0])
    eqm = solve_equilibrium(V)
    reps.extend(M2_decomposition_check(eqm, V))
    Q = make_potential(REFERENCE_QUARTIC)
    Qm = mapped_potential(Q, solve_equilibrium(Q))
    qeqm = solve_equilibrium(Qm)
    for r in M2_decomposition_check(qeqm, Qm):
        r.name = "mapped_quartic_" + r.name
        reps.append(r)
    return reps
