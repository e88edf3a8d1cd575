"""Single-row Jack values, the formal series of prod (1 - a lam_j)^(-beta/2), Kummer's
M(1, xi, z), and the spike weight

    Xi(lam; a) = sum_k ((beta/2) n a)^k C_(k)(lam) / (k! C_(k)(1,...,1))

for any beta > 0, by the power-series route and by a Kummer contour integral.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import ContourDisagreement, InconsistentInputs, InputError, SeriesTruncationInsufficient
from .numerics import ContourSpec, contour_integral

KUMMER_SWITCH = 600.0
SERIES_LOSS = 4.0
CONTOUR_X_MIN = 1e-12  # below (beta/2) n |a| the contour anchor 1/x leaves floating range


# ---------------------------------------------------------------------------
# formal series and Jack values

@dataclass
class SpikeSeries:
    coeffs: np.ndarray
    K: int
    lambda_hash: str
    beta: float
    tail_bound: float = float("nan")
    sufficient: bool = True


def _lam_hash(lam) -> str:
    return hashlib.sha256(np.asarray(lam, dtype=float).tobytes()).hexdigest()[:16]


def power_sums(lam, K: int) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    p = np.zeros(K + 1)
    p[0] = len(lam)
    cur = np.ones_like(lam)
    for m in range(1, K + 1):
        cur = cur * lam
        p[m] = cur.sum()
    return p


def series_coeffs(lam, beta: float, K: int, tol: float | None = None) -> SpikeSeries:
    """Coefficients of prod_j (1 - a lam_j)^(-beta/2) = sum_k c_k a^k up to a^K.

    log of the product is (beta/2) sum_m p_m a^m / m; exponentiating gives
    k c_k = (beta/2) sum_{m=1..k} p_m c_{k-m}.
    """
    if K < 0:
        raise InputError("K must be >= 0")
    p = power_sums(lam, K)
    c = np.zeros(K + 1)
    c[0] = 1.0
    for k in range(1, K + 1):
        c[k] = 0.5 * beta / k * np.dot(p[1:k + 1], c[k - 1::-1])
    tail = float(abs(c[-1])) if K > 0 else 0.0
    ok = True if tol is None else tail <= tol
    return SpikeSeries(c, K, _lam_hash(lam), float(beta), tail, ok)


def _jack_norm(beta: float, k: int) -> float:
    """(2/beta)^k k! / prod_{j<k} (1 + (2/beta) j), the factor turning c_k into C_(k)."""
    al = 2.0 / beta
    return math.exp(k * math.log(al) + math.lgamma(k + 1) - sum(math.log1p(al * j) for j in range(k)))


def jack_row_value(lam, beta: float, k: int) -> float:
    """C-normalized single-row Jack polynomial C_(k)^(2/beta)(lam)."""
    return float(series_coeffs(lam, beta, k).coeffs[k] * _jack_norm(beta, k))


def jack_row_ones(n: int, beta: float, k: int) -> float:
    """C_(k)(1,...,1) = prod_{j<k} (n + (2/beta) j) / (1 + (2/beta) j)."""
    al = 2.0 / beta
    return float(np.prod([(n + al * j) / (1 + al * j) for j in range(k)]))


def pochhammer(c: float, i: int) -> float:
    out = 1.0
    for j in range(i):
        out *= c + j
    return out


def log_pochhammer(c: float, i: int) -> float:
    return float(gammaln(c + i) - gammaln(c))


# ---------------------------------------------------------------------------
# Kummer M(1, xi, z)

def _kummer_series(xi, z):
    # sum z^i / (xi)_i
    term = np.ones_like(z)
    s = np.ones_like(z)
    for i in range(4000):
        term = term * z / (xi + i)
        s = s + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(s)):
            break
    return s


def _kummer_neg_series(xi, z):
    # M(xi - 1, xi, -z); with Re z < 0 the terms do not alternate badly
    w = -z
    term = np.ones_like(z)
    s = np.ones_like(z)
    for i in range(4000):
        term = term * (xi - 1 + i) / ((xi + i) * (i + 1)) * w
        s = s + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(s)):
            break
    return s


def _upper_gamma_cf(s, z, max_iter=2000):
    """e^z z^(-s) Gamma(s, z) by the Legendre continued fraction (modified Lentz)."""
    tiny = 1e-300
    b = z + 1 - s
    f = np.where(b == 0, tiny, b)
    Cc = f.copy()
    D = np.zeros_like(z)
    for i in range(1, max_iter):
        an = -i * (i - s)
        b = b + 2
        D = b + an * D
        D = np.where(D == 0, tiny, D)
        Cc = b + an / Cc
        Cc = np.where(Cc == 0, tiny, Cc)
        D = 1 / D
        delta = Cc * D
        f = f * delta
        if np.all(np.abs(delta - 1) < 1e-16):
            break
    return 1 / f


def log_kummer_M1(xi: float, z):
    """Complex log of M(1, xi, z), any branch (only exp of it is meaningful)."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    out = np.empty_like(z)
    if xi == 1.0:
        out[:] = z
        return out.reshape(shape)
    # the series lose about e^{|z| - |Re z|} to cancellation; elsewhere use the
    # continued fraction of the incomplete-gamma form
    az = np.abs(z)
    small = (az <= KUMMER_SWITCH) & ((az - np.abs(z.real) <= SERIES_LOSS) | (az <= SERIES_LOSS))
    pos = small & (z.real >= 0)
    neg = small & (z.real < 0)
    big = ~small
    if pos.any():
        out[pos] = np.log(_kummer_series(xi, z[pos]))
    if neg.any():
        out[neg] = z[neg] + np.log(_kummer_neg_series(xi, z[neg]))
    if big.any():
        zb = z[big]
        # M = Gamma(xi) z^(1-xi) e^z - (xi-1) e^z z^(1-xi) Gamma(xi-1, z)
        L1 = math.lgamma(xi) + (1 - xi) * np.log(zb) + zb
        L2 = np.log((1 - xi) * _upper_gamma_cf(xi - 1, zb))
        mx = np.maximum(L1.real, L2.real)
        out[big] = mx + np.log(np.exp(L1 - mx) + np.exp(L2 - mx))
    return out.reshape(shape)


def kummer_M1(xi: float, z):
    """M(1, xi, z) = sum_i z^i / (xi)_i for xi in (0, 1]."""
    if not 0 < xi <= 1:
        raise InputError("xi must lie in (0, 1]")
    out = np.exp(log_kummer_M1(xi, z))
    return out[()] if out.ndim == 0 else out


def split_N(n: int, beta: float):
    """(m, xi) with (beta/2) n = m + xi, m integer, xi in (0, 1]."""
    N = 0.5 * beta * n
    m = math.ceil(N) - 1
    xi = N - m
    if xi <= 0:  # rounding guard
        m -= 1
        xi += 1.0
    return int(m), float(xi)


# ---------------------------------------------------------------------------
# spike weight

@dataclass
class SpikeWeight:
    value: float
    logvalue: float
    K: int
    tail_bound: float
    contour_logvalue: float | None = None
    meta: dict = field(default_factory=dict)


def _series_log_weight(lam, x, beta, N, tol, K_max):
    """log sum_k x^k c_k(lam) / (N)_k for lam >= 0, x >= 0, all terms positive.

    lam is scaled to [0, 1] (scale folded into y = x max lam) and the series is
    written as sum_k y^k / k! e_k with e_k = c_k k! / (N)_k, whose recurrence
    e_k = (beta/2) sum_m rho_{k,m} p_m e_{k-m} has rho_{k,m} <= 1/N. Everything
    is carried in logs.
    """
    M = float(lam.max()) if lam.size else 0.0
    if M == 0.0 or x == 0.0:
        return 0.0, 0, 0.0
    mu = lam / M
    y = x * M
    logy = math.log(y)
    lgN = gammaln(N + np.arange(K_max + 1))
    lgF = gammaln(np.arange(K_max + 2))  # lgF[j] = log (j-1)!
    loge = np.full(K_max + 1, -np.inf)
    loge[0] = 0.0
    logp = np.zeros(K_max + 1)
    cur = np.ones_like(mu)
    log_total = 0.0
    small = 0
    lb = math.log(0.5 * beta)
    logtol = math.log(tol)
    for k in range(1, K_max + 1):
        cur = cur * mu
        logp[k] = math.log(cur.sum())
        ms = np.arange(1, k + 1)
        # rho_{k,m} = (k-1)!/(k-m)! * (N)_{k-m}/(N)_k
        v = lgF[k] - lgF[k - ms + 1] + lgN[k - ms] - lgN[k] + logp[1:k + 1] + loge[k - ms]
        vm = v.max()
        loge[k] = lb + vm + math.log(np.exp(v - vm).sum())
        lt = k * logy - lgF[k + 1] + loge[k]
        hi = max(lt, log_total)
        log_total = hi + math.log(math.exp(lt - hi) + math.exp(log_total - hi))
        if lt - log_total <= logtol and k > y:
            small += 1
            if small >= 3:
                return log_total, k, math.exp(lt - log_total)
        else:
            small = 0
    raise SeriesTruncationInsufficient(f"series did not converge within K={K_max} terms")


def _saddle(lam, x, beta):
    top = float(lam.max())
    f = lambda w: x - 0.5 * beta * np.sum(1.0 / (w - lam))
    lo = top + 1e-14 * max(1.0, abs(top))
    hi = top + 1.0
    while f(hi) < 0:
        hi = top + 2 * (hi - top)
    return brentq(f, lo, hi, xtol=1e-14, rtol=1e-14)


def contour_log_weight(lam, a: float, beta: float, n: int | None = None) -> float:
    """log Xi from the Kummer contour integral on a Pi contour through the saddle."""
    lam = np.asarray(lam, dtype=float)
    n = len(lam) if n is None else n
    if a == 0:
        return 0.0
    if a < 0:
        lam, a = -lam, -a
    N = 0.5 * beta * n
    x = N * a
    if x < CONTOUR_X_MIN:
        raise InputError(f"contour route needs (beta/2) n |a| >= {CONTOUR_X_MIN}")
    m, xi = split_N(n, beta)
    w0 = _saddle(lam, x, beta)
    if xi != 1.0:
        w0 = max(w0, 0.5 * (float(lam.max()) + abs(float(lam.max()))) + 1.0 / x)
    d2 = 0.5 * beta * float(np.sum(1.0 / (w0 - lam) ** 2))
    sig = 1.0 / math.sqrt(d2)
    height = max(6 * sig, w0 - min(float(lam.min()), 0.0))

    def psi(w):
        w = np.asarray(w, dtype=complex)
        out = -0.5 * beta * np.log(w[..., None] - lam).sum(axis=-1)
        if xi != 1.0:
            out = out + (xi - 1) * np.log(w)
        return out + log_kummer_M1(xi, x * w)

    psi0 = float(psi(np.array([w0 + 0j]))[0].real)
    g = lambda w: np.exp(psi(w) - psi0)
    spec = ContourSpec("Pi", w0, (height,))
    I = contour_integral(g, spec, symmetric=True).real
    if not I > 0:
        raise ContourDisagreement(f"contour integral is not positive ({I})")
    return log_pochhammer(xi, m) - m * math.log(x) + psi0 + math.log(I)


def spike_weight(lam, a: float, n: int | None = None, beta: float = 2.0, tol: float = 1e-15,
                 cross_check: bool = True, K_max: int = 20000, rel_tol: float = 1e-6) -> SpikeWeight:
    """Xi(lam; a) with log value; optionally cross-checked against the contour route."""
    lam = np.asarray(lam, dtype=float)
    if n is None:
        n = len(lam)
    if n != len(lam):
        raise InconsistentInputs("n must equal the number of points")
    if not beta > 0:
        raise InputError("beta must be positive")
    if a == 0 or n == 0:
        return SpikeWeight(1.0, 0.0, 0, 0.0, 0.0 if cross_check else None)
    N = 0.5 * beta * n
    x = N * a
    sl = lam if a > 0 else -lam
    x = abs(x)
    shift = float(sl.min())
    logS, K, tail = _series_log_weight(sl - shift, x, beta, N, tol, K_max)
    logv = logS + x * shift
    clog = None
    meta = {}
    if cross_check and x < CONTOUR_X_MIN:
        meta["cross_check"] = "skipped: spike below the contour route's range"
    elif cross_check:
        clog = contour_log_weight(lam, a, beta, n)
        if abs(clog - logv) > rel_tol * max(1.0, abs(logv)):
            raise ContourDisagreement(f"series log {logv!r} vs contour log {clog!r}")
    val = math.exp(logv) if logv < 709 else math.inf
    return SpikeWeight(val, logv, K, tail, clog, meta)


# ---------------------------------------------------------------------------
# identity checks

def _circle_coeffs(lam, beta, K, npts=512):
    """c_k by residues: (1/2 pi i) oint prod (1 - z lam)^(-beta/2) z^(-k-1) dz on |z| = rho."""
    lam = np.asarray(lam, dtype=float)
    top = float(np.abs(lam).max()) if lam.size else 0.0
    rho = 0.5 / top if top > 0 else 1.0
    th = 2 * np.pi * np.arange(npts) / npts
    z = rho * np.exp(1j * th)
    f = np.exp(-0.5 * beta * np.log(1 - z[:, None] * lam[None, :]).sum(axis=1))
    ks = np.arange(K + 1)
    return np.real((f[None, :] * np.exp(-1j * ks[:, None] * th[None, :])).mean(axis=1)) / rho ** ks


def verify_jack_identities(n: int, beta: float, K: int = 10, lam=None, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    if lam is None:
        lam = rng.uniform(-1, 1, n)
    lam = np.asarray(lam, dtype=float)
    checks = []

    def add(name, err, tol):
        checks.append({"name": name, "error": float(err), "tol": tol, "ok": bool(err <= tol)})

    jv = [jack_row_value(lam, beta, k) for k in range(K + 1)]
    for a in (0.01, 0.05):
        s = sum(a ** k * jv[k] / _jack_norm(beta, k) for k in range(K + 1))
        exact = float(np.prod((1 - a * lam) ** (-0.5 * beta)))
        add(f"formal_series_a={a}", abs(s - exact) / abs(exact), 1e-10)

    add("degree_one_is_sum", abs(jv[1] - lam.sum()) / max(1.0, abs(lam.sum())), 1e-12)
    for k in range(K + 1):
        single = np.zeros(n)
        single[0] = lam[0]
        v = jack_row_value(single, beta, k)
        add(f"single_spike_k={k}", abs(v - lam[0] ** k) / max(1.0, abs(lam[0]) ** k), 1e-10)
        ones = jack_row_value(np.ones(n), beta, k)
        ref = jack_row_ones(n, beta, k)
        add(f"all_ones_k={k}", abs(ones - ref) / ref, 1e-10)

    cs = series_coeffs(lam, beta, K).coeffs
    cc = _circle_coeffs(lam, beta, K)
    for k in range(K + 1):
        add(f"residue_k={k}", abs(cs[k] - cc[k]) / max(1.0, abs(cs[k])), 1e-9)
    return {"n": n, "beta": beta, "K": K, "seed": seed, "lambda": lam.tolist(),
            "checks": checks, "all_ok": all(c["ok"] for c in checks)}
