import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from spikedbeta import phase
from spikedbeta.errors import BranchCut, NoInteriorMaximum, NonpositiveSpike

R2 = math.sqrt(2)


def _g1_quad(u):
    return integrate.quad(lambda s: math.sqrt(2 - s * s) / math.pi / (u - s), -R2, R2)[0]


def test_semicircle_g_derivatives(gauss):
    _, eqm = gauss
    assert phase.g_deriv(eqm, 2.0, 1) == pytest.approx(2 - R2, abs=1e-13)
    assert _g1_quad(2.0) == pytest.approx(2 - R2, abs=1e-10)
    assert phase.g_deriv(eqm, R2, 1) == pytest.approx(R2, abs=1e-12)
    h = 1e-5
    fd = (phase.g_deriv(eqm, 2 + h, 1) - phase.g_deriv(eqm, 2 - h, 1)) / (2 * h)
    assert phase.g_deriv(eqm, 2.0, 2) == pytest.approx(1 - R2, abs=1e-12)
    assert fd == pytest.approx(1 - R2, abs=1e-8)


@given(st.floats(1.5, 6), st.integers(3, 5))
def test_higher_g_derivatives_closed_form(x, order):
    # g' = z - sqrt(z^2 - 2): g''' = 2 (z^2-2)^{-3/2}, g'''' = -6 z (z^2-2)^{-5/2},
    # g''''' = 6 (4 z^2 + 2)(z^2-2)^{-7/2}
    from spikedbeta.equilibrium import solve_equilibrium
    from spikedbeta.potential import make_potential
    eqm = solve_equilibrium(make_potential([0, 0, 1]))
    d = x * x - 2
    ref = {3: 2 * d ** -1.5, 4: -6 * x * d ** -2.5, 5: 6 * (4 * x * x + 2) * d ** -3.5}[order]
    assert phase.g_deriv(eqm, x, order) == pytest.approx(ref, rel=1e-9)


def test_branch_cut(gauss):
    _, eqm = gauss
    with pytest.raises(BranchCut):
        phase.g_value(eqm, 0.5 + 0j)
    with pytest.raises(BranchCut):
        phase.g_deriv(eqm, 1.0, 1)


@pytest.mark.parametrize("a,c", [(1.0, 1.5), (R2, R2), (2.0, R2), (0.5, 2.25)])
def test_c_of_a(gauss, a, c):
    V, eqm = gauss
    assert phase.c_of_a(eqm, V, a) == pytest.approx(c, abs=1e-12)


def test_c_of_a_rejects_nonpositive(gauss):
    V, eqm = gauss
    with pytest.raises(NonpositiveSpike):
        phase.c_of_a(eqm, V, 0.0)


@given(st.floats(0.05, 5))
def test_c_of_a_invariants(a):
    from spikedbeta.equilibrium import solve_equilibrium
    from spikedbeta.potential import make_potential
    V = make_potential([0, 0, 1])
    eqm = solve_equilibrium(V)
    c = phase.c_of_a(eqm, V, a)
    assert c >= eqm.b2
    assert (c == eqm.b2) == (a >= 0.5 * V(eqm.b2, 1))


def test_stationarity_and_edge_equality(gauss, quartic):
    V, eqm = gauss
    assert phase.G_deriv(eqm, V, 2.0, 1.5, 1) == pytest.approx(0, abs=1e-13)
    for (W, q) in (gauss, quartic):
        G, H = phase.G_H(q, W, 1.3, q.b2)
        assert G == pytest.approx(H, abs=1e-12)


@given(st.floats(0.1, 4), st.floats(1e-3, 5))
def test_G_below_H_right_of_edge(a, dx):
    from spikedbeta.equilibrium import solve_equilibrium
    from spikedbeta.potential import REFERENCE_QUARTIC, make_potential
    V = make_potential(REFERENCE_QUARTIC)
    eqm = solve_equilibrium(V)
    G, H = phase.G_H(eqm, V, a, eqm.b2 + dx)
    assert G < H


def test_critical_values(gauss, gauss2, quartic):
    assert phase.critical_value(gauss[1], gauss[0]) == pytest.approx(R2, abs=1e-10)
    assert phase.critical_value(gauss2[1], gauss2[0]) == pytest.approx(2, abs=1e-10)
    V, eqm = quartic
    a_c = phase.critical_value(eqm, V)
    assert 0 < a_c <= 0.5 * V(eqm.b2, 1)


def test_maximizers_semicircle(gauss):
    V, eqm = gauss
    (x, G, k2), = phase.maximizers(eqm, V, 2.0, 1e-9)
    assert x == pytest.approx(1.5, abs=1e-12) and k2 == 2
    h = 1e-4
    fd = (phase.G_H(eqm, V, 2.0, x + h)[0] - 2 * G + phase.G_H(eqm, V, 2.0, x - h)[0]) / h ** 2
    assert phase.G_deriv(eqm, V, 2.0, x, 2) == pytest.approx(-4, abs=1e-11)
    assert fd == pytest.approx(-4, abs=1e-5)
    (x3, _, _), = phase.maximizers(eqm, V, 3.0)
    assert x3 == pytest.approx(1.5 + 1 / 3, abs=1e-12)


def test_no_maximum_below_critical(gauss):
    V, eqm = gauss
    with pytest.raises(NoInteriorMaximum):
        phase.maximizers(eqm, V, 1.0)


def test_classify_semicircle(gauss):
    V, eqm = gauss
    r = phase.classify(eqm, V, 1.0)
    assert r.regime == phase.SUBCRITICAL and r.c_of_a == pytest.approx(1.5)
    assert r.location == pytest.approx(R2)
    r = phase.classify(eqm, V, 2.0)
    assert r.regime == phase.SUPERCRITICAL and r.location == pytest.approx(1.5, abs=1e-12)
    assert phase.classify(eqm, V, R2).regime == phase.AT_CRITICAL


def test_classify_secondary(two_well, two_well_a0):
    V, eqm = two_well
    a0, a_c = two_well_a0
    r = phase.classify(eqm, V, a0, a_c=a_c)
    assert r.regime == phase.SECONDARY and len(r.maximizers) == 2
    (x1, G1, _), (x2, G2, _) = r.maximizers
    assert x1 < x2 and abs(G1 - G2) <= 1e-8
    for x, _, _ in r.maximizers:
        assert abs(phase.G_deriv(eqm, V, a0, x, 1)) < 1e-9
    for da in (-1e-3, 1e-3):
        assert phase.classify(eqm, V, a0 + da, a_c=a_c).regime == phase.SUPERCRITICAL


@given(st.floats(1.45, 5))
def test_supercritical_maximizer_closed_form(a):
    from spikedbeta.equilibrium import solve_equilibrium
    from spikedbeta.potential import make_potential
    V = make_potential([0, 0, 1])
    eqm = solve_equilibrium(V)
    r = phase.classify(eqm, V, a, a_c=R2)
    assert r.regime == phase.SUPERCRITICAL
    assert r.location == pytest.approx(a / 2 + 1 / a, abs=1e-10)


def test_asymptotic_log_density(gauss):
    from spikedbeta.errors import AtEdge
    V, eqm = gauss
    assert phase.asymptotic_log_density(eqm, V, 2.0, 1.5) == pytest.approx(
        phase.classify(eqm, V, 2.0).g_max, abs=1e-14)
    c = phase.c_of_a(eqm, V, 1.0)
    lo = phase.asymptotic_log_density(eqm, V, 1.0, c - 1e-7)
    hi = phase.asymptotic_log_density(eqm, V, 1.0, c + 1e-7)
    assert lo == pytest.approx(hi, abs=1e-6)
    # subcritical branch between e and c(1) = 1.5, each term by quadrature
    u = 1.45
    g = integrate.quad(lambda s: math.log(u - s) * math.sqrt(2 - s * s) / math.pi, -R2, R2)[0]
    ref = float(phase.G_H(eqm, V, 1.0, c)[1]) - u * u + 2 * g - eqm.ell
    assert phase.asymptotic_log_density(eqm, V, 1.0, u) == pytest.approx(ref, abs=1e-9)
    with pytest.raises(AtEdge):
        phase.asymptotic_log_density(eqm, V, 1.0, 1.2)
