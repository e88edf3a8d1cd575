"""Acceptance suite: one printed PASS/FAIL line per criterion.

Monte Carlo thresholds (criteria 5, 6, 8) compare finite-n samples with n -> infinity
limits; they encode the expected finite-n fuzz and are not exact statements.
"""
import io
import json
import math
import warnings

import numpy as np
import pytest
from scipy import stats

from spikedbeta import appendix_oracle as AP
from spikedbeta import cli, phase, sampler
from spikedbeta import jack_general_beta as jack
from spikedbeta import limit_laws as LL
from spikedbeta.equilibrium import solve_equilibrium, verify_variational
from spikedbeta.errors import SearchHorizonExceeded
from spikedbeta.potential import REFERENCE_QUARTIC, TWO_WELL_QUARTIC, make_potential

R2 = math.sqrt(2)
SEED = 0
X2 = make_potential([0, 0, 1])


@pytest.fixture
def report(capsys):
    def _report(k, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance] criterion {k} ({title}): {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return _report


# ---------------------------------------------------------------------------
# stochastic artifacts, cached so criterion 9 can rerun and compare bytes

def _c5_sample(beta, a):
    return sampler.sample_gaussian_spiked(200, beta, a, 2000, seed=SEED)


def _c6_mcmc(beta, steps):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return sampler.mcmc_spectrum(X2, 50, beta, 2.0, steps, seed=SEED)


def _c6_direct():
    return sampler.sample_gaussian_spiked(50, 2, 2.0, 2000, seed=SEED + 1)


def _c8_spot(n):
    eqm = solve_equilibrium(X2)
    return AP.Z_asymptotics_spotcheck(eqm, X2, 2.5, n, "a", z=1.0, mc_samples=100000, seed=SEED)


ARTIFACTS = {
    "c5_beta1": lambda: _c5_sample(1, 2.0).to_csv(),
    "c5_beta2": lambda: _c5_sample(2, 2.0).to_csv(),
    "c5_sub": lambda: _c5_sample(2, 0.5).to_csv(),
    "c6_beta3": lambda: _c6_mcmc(3.0, 200000).to_csv(),
    "c6_beta2": lambda: _c6_mcmc(2.0, 125000).to_csv(),
    "c6_direct": lambda: _c6_direct().to_csv(),
    "c8_n8": lambda: json.dumps(_c8_spot(8), sort_keys=True, default=float),
    "c8_n16": lambda: json.dumps(_c8_spot(16), sort_keys=True, default=float),
}
_FIRST = {}


def artifact(key):
    if key not in _FIRST:
        _FIRST[key] = ARTIFACTS[key]()
    return _FIRST[key]


def sample_of(key):
    return sampler.EmpiricalSample.from_csv(artifact(key))


# ---------------------------------------------------------------------------

def test_criterion_1_semicircle(report):
    eqm = solve_equilibrium(X2)
    var = verify_variational(eqm, X2, 200, 200)
    checks = {
        "support": abs(eqm.b1 + R2) <= 1e-10 and abs(eqm.b2 - R2) <= 1e-10,
        "h": abs(eqm.h_coeffs[0] - 2) <= 1e-10 and all(abs(c) <= 1e-10 for c in eqm.h_coeffs[1:]),
        "ell": abs(eqm.ell - (-1 - math.log(2))) <= 1e-8,
        "interior": var.interior_residual < 1e-8,
        "exterior": var.exterior_margin > 0,
    }
    ok = all(checks.values())
    report(1, "semicircle suite", ok, f"residual={var.interior_residual:.2e} margin={var.exterior_margin:.3f}")
    assert ok, checks


def test_criterion_2_phase_closed_forms(report):
    eqm = solve_equilibrium(X2)
    errs = []
    for a in (0.5, 1.0, 1.3):
        errs.append(abs(phase.c_of_a(eqm, X2, a) - (a / 2 + 1 / a)))
    for a in (1.6, 2.0, 3.0):
        (x0, _, _), = phase.maximizers(eqm, X2, a)
        errs.append(abs(x0 - (a / 2 + 1 / a)))
        g2 = 1 - x0 / math.sqrt(x0 * x0 - 2)
        errs.append(abs(phase.G_deriv(eqm, X2, a, x0, 2) - (g2 - 2)))
    errs.append(abs(phase.critical_value(eqm, X2) - R2))
    V2 = make_potential([0, 0, 2])
    errs.append(abs(phase.critical_value(solve_equilibrium(V2), V2) - 2))
    ok = max(errs) <= 1e-8
    report(2, "phase closed forms", ok, f"max_err={max(errs):.2e}")
    assert ok


def test_criterion_3_appendix_oracle(report):
    reps = AP.run_all()
    kernels = [r for r in reps if r.name.startswith(("F_", "G_", "arcsin"))]
    products = [r for r in reps if "product_vs_prefactor" in r.name]
    consts = [r for r in reps if "C_constant" in r.name]
    ok = (all(r.abs_err <= 1e-8 for r in kernels) and all(r.rel_err <= 1e-6 for r in products)
          and all(r.rel_err <= 1e-5 for r in consts) and all(r.passed for r in reps))
    worst = max(r.rel_err for r in products + consts)
    report(3, "closed-form integral oracle", ok,
           f"{len(reps)} checks, kernel max_abs={max(r.abs_err for r in kernels):.1e}, product/C max_rel={worst:.1e}")
    assert ok


def test_criterion_4_jack_kummer(report):
    worst_id = 0.0
    ok_id = True
    for n, beta, K in [(4, 2, 10), (3, 1, 10), (5, 4, 12), (4, 3, 10)]:
        rep = jack.verify_jack_identities(n, beta, K)
        ok_id &= rep["all_ok"] and all(c["error"] <= 1e-9 for c in rep["checks"])
        worst_id = max([worst_id] + [c["error"] for c in rep["checks"]])
    rng = np.random.default_rng(20240)
    worst = 0.0
    odd_half = 0
    for i in range(100):
        n = int(rng.integers(1, 13))
        beta = [1.0, 2.0, 4.0, float(rng.uniform(0.3, 6))][i % 4]
        if i % 4 == 0 and n % 2 == 0:
            n += 1  # odd n at beta = 1 gives xi = 1/2
        odd_half += jack.split_N(n, beta)[1] == 0.5
        lam = rng.uniform(-1.5, 1.5, n)
        a = float(rng.uniform(-3, 3))
        s = jack.spike_weight(lam, a, beta=beta, cross_check=False).logvalue
        c = jack.contour_log_weight(lam, a, beta)
        worst = max(worst, abs(math.expm1(c - s)))
    ok = ok_id and worst <= 1e-6 and odd_half >= 20
    report(4, "Jack/Kummer suite", ok, f"identity max_err={worst_id:.1e}, routes max_rel={worst:.1e}, "
                                        f"xi=1/2 cases={odd_half}")
    assert ok


@pytest.mark.xfail(strict=True, reason="O(1/n) location bias at n=200 exceeds 3 standard errors for "
                                       "beta=2; see the decision ledger")
def test_criterion_5_gaussian_monte_carlo(report):
    eqm = solve_equilibrium(X2)
    details, ok = [], True
    for beta in (1, 2):
        s = sample_of(f"c5_beta{beta}")
        law = LL.predict_limit(eqm, X2, 2.0, beta=beta, a_c=R2)
        c = law.components[0]
        v = np.array(s.values)
        D = stats.kstest((v - c.location) / c.scale(200), "norm").statistic
        se = v.std(ddof=1) / math.sqrt(len(v))
        z = (v.mean() - 1.5) / se
        ok &= D < 0.05 and abs(z) <= 3
        details.append(f"beta={beta}: KS={D:.4f} mean={v.mean():.5f} ({z:+.2f} SE)")
    sub = np.mean(sample_of("c5_sub").values)
    ok &= abs(sub - R2) < 0.05
    details.append(f"a=0.5: mean={sub:.4f}")
    report(5, "Gaussian Monte Carlo vs limit law", ok, "; ".join(details))
    assert ok


def test_criterion_5_supplement_bias_is_order_one_over_n(report):
    # the beta = 2 location offset shrinks like 1/n: n * (mean - x0) stays bounded
    rows = []
    for n, T in ((50, 4000), (100, 3000)):
        v = np.array(sampler.sample_gaussian_spiked(n, 2, 2.0, T, seed=SEED).values)
        rows.append((n, v.mean() - 1.5, v.std(ddof=1) / math.sqrt(T)))
    v = np.array(sample_of("c5_beta2").values)
    rows.append((200, v.mean() - 1.5, v.std(ddof=1) / math.sqrt(len(v))))
    scaled = [n * b for n, b, _ in rows]
    ok = all(-1.0 < s < 0.0 for s in scaled) and abs(rows[-1][1]) < abs(rows[0][1])
    report("5 (supplementary)", "beta=2 offset scales as 1/n", ok,
           " ".join(f"n={n}:{b:+.4f}+-{e:.4f}" for n, b, e in rows))
    assert ok


def test_criterion_6_general_beta_mcmc(report):
    s3 = sample_of("c6_beta3")
    m3 = float(np.mean(s3.values))
    s2 = sample_of("c6_beta2")
    d = sample_of("c6_direct")
    D = stats.ks_2samp(s2.values, d.values).statistic
    ok = abs(m3 - 1.5) < 0.1 and D < 0.08 and len(s2.values) >= 2000
    report(6, "general-beta MCMC", ok, f"beta=3 mean={m3:.4f} (acc {s3.diagnostics['acceptance']:.2f}); "
                                        f"beta=2 MCMC vs direct KS={D:.4f} on {len(s2.values)} states")
    assert ok


@pytest.mark.xfail(strict=True, reason="the reference quartic has no spike with two tied maximizers; "
                                       "see the decision ledger")
def test_criterion_7_secondary_critical_reference_quartic(report):
    V = make_potential(REFERENCE_QUARTIC)
    eqm = solve_equilibrium(V)
    a_c = phase.critical_value(eqm, V)
    most = max(len(phase.local_maxima(eqm, V, a)) for a in np.linspace(a_c * 1.001, a_c + 20, 400))
    try:
        a0 = phase.find_secondary_critical(eqm, V, a_c * (1 + 1e-6), a_c + 20, 400)
        found = True
    except SearchHorizonExceeded:
        a0, found = None, False
    report(7, "secondary-critical weights on the reference quartic", found,
           f"a_c={a_c:.6f}, at most {most} local maximum of G beyond c(a) for a in (a_c, a_c+20]")
    assert found
    law = LL.predict_limit(eqm, V, a0, a_c=a_c)
    assert sum(c.weight for c in law.components) == 1


def test_criterion_7_supplement_two_well_quartic(report):
    V = make_potential(TWO_WELL_QUARTIC)
    eqm = solve_equilibrium(V)
    a_c = phase.critical_value(eqm, V)
    a0 = phase.find_secondary_critical(eqm, V, a_c * (1 + 1e-6), a_c + 6, 300)
    mx = phase.maximizers(eqm, V, a0)
    tie = abs(mx[0][1] - mx[1][1])
    p = [c.weight for c in LL.predict_limit(eqm, V, a0, alpha=0.0, a_c=a_c).components]
    p_hi = LL.predict_limit(eqm, V, a0, alpha=20.0, a_c=a_c).components[1].weight
    p_lo = LL.predict_limit(eqm, V, a0, alpha=-20.0, a_c=a_c).components[0].weight
    q = LL.q_beta(2.0, 2, mx[0][0], mx[1][0])
    q_hand = (2 / 2.0) * (0.5 - 1 / 4) / (mx[1][0] - mx[0][0])
    ok = len(mx) == 2 and tie <= 1e-8 and abs(sum(p) - 1.0) <= 1e-12 and p_hi > 0.999 and p_lo > 0.999 and q == q_hand
    report("7 (supplementary)", "secondary-critical weights on a two-well quartic", ok,
           f"a0={a0:.10f} tie={tie:.1e} p=({p[0]:.4f}, {p[1]:.4f}) p2(+20)={p_hi:.6f} p1(-20)={p_lo:.6f}")
    assert ok


def test_criterion_8_partition_function_trend(report):
    r8 = json.loads(artifact("c8_n8"))
    r16 = json.loads(artifact("c8_n16"))
    bar = 2 * math.hypot(r8["rel_se"], r16["rel_se"])
    ok = r16["rel_err"] < 0.2 and r16["rel_err"] <= r8["rel_err"] + bar
    report(8, "partition-function asymptotics trend", ok,
           f"rel_err n=8: {r8['rel_err']:.4f}+-{r8['rel_se']:.4f}, n=16: {r16['rel_err']:.4f}+-{r16['rel_se']:.4f}")
    assert ok


def test_criterion_8_property_over_spikes_and_seeds(report):
    from hypothesis import given, settings
    from hypothesis import strategies as st
    eqm = solve_equilibrium(X2)
    seen = []

    @settings(max_examples=4, deadline=None, database=None, derandomize=True)
    @given(st.floats(0.25, 2.0), st.integers(1, 10 ** 6))
    def prop(z, seed):
        r8 = AP.Z_asymptotics_spotcheck(eqm, X2, 2.5, 8, "a", z=z, mc_samples=40000, seed=seed)
        r16 = AP.Z_asymptotics_spotcheck(eqm, X2, 2.5, 16, "a", z=z, mc_samples=40000, seed=seed)
        seen.append((z, r8["rel_err"], r16["rel_err"]))
        assert r16["rel_err"] < 0.2
        assert r16["rel_err"] <= r8["rel_err"] + 2 * math.hypot(r8["rel_se"], r16["rel_se"])

    prop()
    report("8 (property)", "trend over random z and seeds", True,
           " ".join(f"z={z:.2f}:{a:.3f}->{b:.3f}" for z, a, b in seen))


def _cli_bytes(argv):
    out = io.StringIO()
    assert cli.main(argv, stdout=out) == 0
    return out.getvalue()


def test_criterion_9_determinism(report):
    same = {key: ARTIFACTS[key]() == artifact(key) for key in ARTIFACTS}
    for argv in (["eqm", "--potential", "reference-quartic"],
                 ["phase", "--a-min", "0.5", "--a-max", "3", "--a-count", "8", "--format", "csv"],
                 ["predict", "--a", "2", "--n", "200"],
                 ["verify-appendix"]):
        same[" ".join(argv[:1])] = _cli_bytes(argv) == _cli_bytes(argv)
    ok = all(same.values())
    report(9, "determinism", ok, f"{sum(same.values())}/{len(same)} artifacts byte-identical on rerun")
    assert ok, same
