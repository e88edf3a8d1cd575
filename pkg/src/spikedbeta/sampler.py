"""Monte Carlo for the largest eigenvalue: dense Gaussian spiked ensembles (beta = 1, 2, 4)
and a Metropolis chain on the general-beta joint density."""
from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContourDisagreement, EmptySample, InputError, UnsupportedBeta
from .jack_general_beta import _saddle, log_kummer_M1, log_pochhammer, spike_weight, split_N
from .numerics import gauss_legendre
from .potential import Potential, fmt17, make_potential

DIRECT = "DirectGaussian"
MCMC = "MCMC"


@dataclass
class EmpiricalSample:
    values: list
    n: int
    beta: float
    a: float
    potential_hash: str
    seed: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = sorted(float(v) for v in self.values)

    def meta(self) -> dict:
        return {"n": self.n, "beta": self.beta, "a": self.a, "potential_hash": self.potential_hash,
                "seed": self.seed, "method": self.method, "count": len(self.values),
                "diagnostics": self.diagnostics}

    def to_csv(self, header: dict | None = None) -> str:
        out = io.StringIO()
        for k, v in {**(header or {}), **self.meta()}.items():
            out.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
        out.write("xi_max\n")
        for v in self.values:
            out.write(fmt17(v) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        return json.dumps({**self.meta(), "values": [float(fmt17(v)) for v in self.values]},
                          sort_keys=True, indent=1)

    @classmethod
    def from_csv(cls, text: str) -> "EmpiricalSample":
        meta, vals = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                meta[k.strip()] = json.loads(v)
            elif line.strip() and line.strip() != "xi_max":
                vals.append(float(line))
        return cls(vals, int(meta["n"]), float(meta["beta"]), float(meta["a"]),
                   meta["potential_hash"], int(meta["seed"]), meta["method"], meta.get("diagnostics", {}))

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalSample":
        d = json.loads(text)
        d = d.get("result", d)  # CLI documents wrap the sample
        return cls(d["values"], int(d["n"]), float(d["beta"]), float(d["a"]), d["potential_hash"],
                   int(d["seed"]), d["method"], d.get("diagnostics", {}))


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream per (seed, index) from a counter-based generator."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


# ---------------------------------------------------------------------------
# dense Gaussian ensembles, V(x) = x^2

def gaussian_spiked_matrix(n: int, beta: int, a: float, rng: np.random.Generator) -> np.ndarray:
    """One draw with eigenvalue density |Delta|^beta prod e^{-(beta/2) n lam^2} times the spike
    weight for a; the spike enters as a shift diag(a/2, 0, ...)."""
    if beta == 1:
        W = rng.normal(0.0, math.sqrt(1 / (2 * n)), (n, n))
        W = np.triu(W, 1)
        W = W + W.T
        W[np.diag_indices(n)] = rng.normal(0.0, math.sqrt(1 / n), n)
        W[0, 0] += 0.5 * a
        return W
    if beta == 2:
        s = math.sqrt(1 / (4 * n))
        W = rng.normal(0.0, s, (n, n)) + 1j * rng.normal(0.0, s, (n, n))
        W = np.triu(W, 1)
        W = W + W.conj().T
        W[np.diag_indices(n)] = rng.normal(0.0, math.sqrt(1 / (2 * n)), n)
        W[0, 0] += 0.5 * a
        return W
    if beta == 4:
        # quaternion q = x0 + x1 i + x2 j + x3 k as [[x0 + i x1, x2 + i x3], [-x2 + i x3, x0 - i x1]]
        s = math.sqrt(1 / (8 * n))
        x = rng.normal(0.0, s, (4, n, n))
        d = rng.normal(0.0, math.sqrt(1 / (4 * n)), n)
        A = np.triu(x[0] + 1j * x[1], 1)
        B = np.triu(x[2] + 1j * x[3], 1)
        A = A + A.conj().T
        A[np.diag_indices(n)] = d
        B = B - B.T  # self-dual: off-diagonal quaternion block conjugates across the diagonal
        A[0, 0] += 0.5 * a
        H = np.empty((2 * n, 2 * n), dtype=complex)
        H[0::2, 0::2] = A
        H[1::2, 1::2] = A.conj()
        H[0::2, 1::2] = B
        H[1::2, 0::2] = -B.conj()
        return H
    raise UnsupportedBeta(f"direct sampling needs beta in {{1, 2, 4}}, got {beta}")


def sample_gaussian_spiked(n: int, beta: int, a: float, trials: int, seed: int = 0) -> EmpiricalSample:
    if beta not in (1, 2, 4):
        raise UnsupportedBeta(f"direct sampling needs beta in {{1, 2, 4}}, got {beta}")
    if trials < 1:
        raise InputError("trials must be >= 1")
    vals = []
    for t in range(trials):
        M = gaussian_spiked_matrix(n, beta, a, trial_rng(seed, t))
        vals.append(np.linalg.eigvalsh(M)[-1])
    V = make_potential([0.0, 0.0, 1.0])
    return EmpiricalSample(vals, n, float(beta), float(a), V.hash, seed, DIRECT)


# ---------------------------------------------------------------------------
# spike weight on fixed contour nodes, updated one coordinate at a time

class ContourNodes:
    """log Xi(lam) as a fixed quadrature over a Pi contour through the saddle.

    Per node q the state keeps S_q = sum_j Log(w_q - lam_j); moving one point
    changes S_q by Log(w_q - new) - Log(w_q - old).
    """

    def __init__(self, lam, a, beta, n, panels=(8, 40), order=16, headroom=None):
        lam = np.asarray(lam, dtype=float)
        self.beta, self.n = beta, n
        self.flip = a < 0
        a = abs(a)
        lam = -lam if self.flip else lam
        N = 0.5 * beta * n
        x = N * a
        m, xi = split_N(n, beta)
        top = float(lam.max())
        # headroom lets the chain move before a re-anchor; moving the anchor a
        # distance d past the saddle costs e^{x d} in cancellation, so cap it
        if headroom is None:
            headroom = 0.25 * (top - float(lam.min())) / n
        w0 = max(_saddle(lam, x, beta), top + 1e-3, top + min(headroom, 5.0 / x))
        if xi != 1.0:
            w0 = max(w0, max(top, 0.0) + 1.0 / x)
        d2 = 0.5 * beta * float(np.sum(1.0 / (w0 - lam) ** 2))
        sig = 1.0 / math.sqrt(d2)
        h = max(6.0 * sig, w0 - min(float(lam.min()), 0.0) + 1.0)
        L = (0.5 * beta * n * math.log(1 + 10 * h) + 40.0) / x + 2 * h + abs(w0)
        if xi != 1.0:
            L = 1e8 * (h + abs(w0))  # only algebraic decay to the left
        t, wt = gauss_legendre(order)
        core = min(8.0 * sig, h)
        e1 = np.linspace(0, core, panels[0] + 1)
        # grade toward the nearest branch point so GL sees a smooth integrand
        dist = w0 - float(lam.max())
        if xi != 1.0:
            dist = min(dist, w0)
        if dist < core / panels[0]:
            e1 = np.unique(np.concatenate([e1, np.geomspace(0.25 * dist, core, panels[0])]))
        if core < h:
            e1 = np.concatenate([e1, np.geomspace(core, h, panels[0] + 1)[1:]])
        e2 = np.concatenate([[0.0], np.geomspace(h / 64, L, panels[1])])
        pts, dws = [], []
        for edges, start, d in ((e1, w0 + 0j, 1j), (e2, w0 + 1j * h, -1.0 + 0j)):
            lo, hi = edges[:-1], edges[1:]
            s = (0.5 * (hi + lo))[:, None] + (0.5 * (hi - lo))[:, None] * t[None, :]
            pts.append((start + d * s).ravel())
            dws.append(((0.5 * (hi - lo))[:, None] * wt[None, :]).ravel() * d)
        self.w = np.concatenate(pts)
        dw = np.concatenate(dws)
        self.w0 = w0
        logfix = log_kummer_M1(xi, x * self.w)
        if xi != 1.0:
            logfix = logfix + (xi - 1) * np.log(self.w)
        fix0 = float(log_kummer_M1(xi, np.array([x * w0 + 0j]))[0].real)
        if xi != 1.0:
            fix0 += (xi - 1) * math.log(w0)
        self.logfix = logfix - fix0 + np.log(dw)
        self.const = log_pochhammer(xi, m) - m * math.log(x) + fix0
        self.S = np.log(self.w[:, None] - lam[None, :]).sum(axis=1)
        self.S0 = float(np.log(w0 - lam).sum())

    def _inside(self, v):
        v = -v if self.flip else v
        return v < self.w0

    def log_xi(self, S=None, S0=None):
        S = self.S if S is None else S
        S0 = self.S0 if S0 is None else S0
        k = 0.5 * self.beta
        val = np.exp(self.logfix - k * (S - S0)).sum().imag / math.pi
        if not val > 0:
            return -math.inf
        return self.const - k * S0 + math.log(val)

    def delta(self, old, new):
        if self.flip:
            old, new = -old, -new
        # both factors lie in the upper half plane, so the principal log of the
        # ratio equals the difference of principal logs
        dS = np.log((self.w - new) / (self.w - old))
        dS0 = math.log(self.w0 - new) - math.log(self.w0 - old)
        return dS, dS0


def _log_vdm_row(lam, i, v, beta):
    d = np.abs(v - np.delete(lam, i))
    return beta * np.log(d).sum()


def _init_state(V, n, beta, a, rng):
    from .equilibrium import solve_equilibrium
    eqm = solve_equilibrium(V)
    th = (2 * np.arange(n, 0, -1) - 1) * np.pi / (2 * n)
    lam = eqm.center + eqm.radius * np.cos(th) * (1 - 0.5 / n)
    lam = lam + rng.normal(0, 1e-3 * eqm.radius, n)
    return np.sort(lam)


def _autocorr_time(x, max_lag=None):
    x = np.asarray(x, dtype=float)
    if len(x) < 4 or np.var(x) == 0:
        return 1.0
    x = x - x.mean()
    f = np.fft.rfft(x, 2 * len(x))
    acf = np.fft.irfft(f * np.conj(f))[: len(x)]
    acf /= acf[0]
    tau = 1.0
    for k in range(1, len(x) if max_lag is None else max_lag):
        tau += 2 * acf[k]
        if k >= 5 * tau:
            break
    return float(max(tau, 1.0))


def mcmc_spectrum(V: Potential, n: int, beta: float, a: float, steps: int, burn_in: int | None = None,
                  thin: int | None = None, seed: int = 0, init=None, step: float | None = None,
                  lattice: float | None = None, target_accept: float = 0.35,
                  check_tol: float = 1e-8) -> EmpiricalSample:
    """Single-coordinate random-walk Metropolis on

        |Delta(lam)|^beta prod e^{-(beta/2) n V(lam_j)} Xi(lam; a, beta, n).

    The proposal scale adapts toward target_accept during burn-in and is then
    frozen. With lattice=h the proposals are integer multiples of h.
    """
    if not beta > 0:
        raise InputError("beta must be positive")
    if burn_in is None:
        burn_in = steps // 5
    if thin is None:
        thin = n
    if not steps > burn_in:
        raise InputError("steps must exceed burn_in")
    rng = trial_rng(seed, 0)
    lam = np.array(init, dtype=float) if init is not None else _init_state(V, n, beta, a, rng)
    if len(lam) != n:
        raise InputError("init must have n points")
    k = 0.5 * beta * n
    spiked = a != 0
    nodes = None
    n_reanchor = 0

    def reanchor(lam):
        nonlocal n_reanchor
        n_reanchor += 1
        room = 3.0 * step
        nd = ContourNodes(lam, a, beta, n, headroom=room)
        ref = spike_weight(lam, a, n, beta, cross_check=False).logvalue
        got = nd.log_xi()
        if abs(got - ref) > check_tol * max(1.0, abs(ref)):
            nd = ContourNodes(lam, a, beta, n, panels=(16, 80), order=24, headroom=room)
            got = nd.log_xi()
            if abs(got - ref) > check_tol * max(1.0, abs(ref)):
                raise ContourDisagreement(f"node quadrature {got!r} vs series {ref!r}")
        return nd

    # periodic rebuild keeps the nodes matched to the current configuration
    reanchor_every = max(10 * n, 500)
    if step is None:
        step = 0.5 / n if n > 1 else 0.5 / math.sqrt(beta)
    if lattice is not None:
        step = max(step, lattice)
    lx_cur = 0.0
    if spiked:
        nodes = reanchor(lam)
        lx_cur = nodes.log_xi()
    acc_total = acc_window = 0
    tried_after = acc_after = 0
    kept = []
    for it in range(steps):
        if spiked and it % reanchor_every == 0 and it > 0:
            nodes = reanchor(lam)
            lx_cur = nodes.log_xi()
        i = rng.integers(n)
        old = lam[i]
        if lattice is not None:
            jump = int(round(rng.normal(0, step) / lattice))
            if jump == 0:
                jump = 1 if rng.random() < 0.5 else -1
            new = old + jump * lattice
        else:
            new = old + rng.normal(0, step)
        lr = -k * (V(new) - V(old))
        if n > 1:
            lr += _log_vdm_row(lam, i, new, beta) - _log_vdm_row(lam, i, old, beta)
        dS = dS0 = None
        if spiked:
            outside = not nodes._inside(new)
            if outside:
                # past the anchor: exact series value, nodes rebuilt only on acceptance
                lam2 = lam.copy()
                lam2[i] = new
                lx_new = spike_weight(lam2, a, n, beta, cross_check=False).logvalue
            else:
                dS, dS0 = nodes.delta(old, new)
                lx_new = nodes.log_xi(nodes.S + dS, nodes.S0 + dS0)
            lr += lx_new - lx_cur
        if math.log(rng.random()) < lr:
            lam[i] = new
            if spiked:
                if outside:
                    nodes = reanchor(lam)
                    lx_cur = nodes.log_xi()
                else:
                    nodes.S = nodes.S + dS
                    nodes.S0 = nodes.S0 + dS0
                    lx_cur = lx_new
            acc_total += 1
            acc_window += 1
            if it >= burn_in:
                acc_after += 1
        if it >= burn_in:
            tried_after += 1
        if it < burn_in and lattice is None and (it + 1) % 100 == 0:
            rate = acc_window / 100
            step *= math.exp(rate - target_accept)
            acc_window = 0
        if it >= burn_in and (it - burn_in) % thin == thin - 1:
            kept.append(float(lam.max()))
    rate = acc_after / max(tried_after, 1)
    diag = {"acceptance": rate, "step": step, "burn_in": burn_in, "thin": thin, "steps": steps,
            "tau_int": _autocorr_time(kept), "reanchors": n_reanchor,
            "adaptation_ok": bool(0.1 < rate < 0.7)}
    if not diag["adaptation_ok"]:
        warnings.warn(f"MCMC acceptance {rate:.3f} far from target {target_accept}", RuntimeWarning)
    return EmpiricalSample(kept, n, float(beta), float(a), V.hash, seed, MCMC, diag)


# ---------------------------------------------------------------------------
# comparison with a predicted law

def ks_statistic(values, cdf) -> float:
    """sup |F_emp - F| over the jump points of the empirical CDF."""
    x = np.sort(np.asarray(values, dtype=float))
    if len(x) == 0:
        raise EmptySample("empty sample")
    F = np.asarray(cdf(x), dtype=float)
    N = len(x)
    i = np.arange(N)
    # ties: the empirical CDF jumps once per distinct value
    upper = np.searchsorted(x, x, side="right") / N
    lower = np.searchsorted(x, x, side="left") / N
    return float(max(np.max(upper - F), np.max(F - lower)))


def ks_compare(sample: EmpiricalSample, law, n: int | None = None):
    if not sample.values:
        raise EmptySample("empty sample")
    n = sample.n if n is None else n
    D = ks_statistic(sample.values, lambda x: law.cdf(x, n))
    N = len(sample.values)
    summary = {"D": D, "count": N, "n": n, "sqrtN_D": D * math.sqrt(N),
               "mean": float(np.mean(sample.values)), "std": float(np.std(sample.values)),
               "law_locations": [c.location for c in law.components],
               "law_scales": [c.scale(n) for c in law.components],
               "law_weights": [c.weight for c in law.components]}
    return D, summary
