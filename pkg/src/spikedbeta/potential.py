"""Polynomial potentials V(x) = sum_k c_k x^k of even degree with positive leading term."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyCoefficients, InconsistentInputs, NonpositiveLeading, OddDegree


# quartic satisfying all four standing conditions with a_c < V'(e)/2
REFERENCE_QUARTIC = (0.0, 0.11418, 0.37448, -0.16736, 0.02093)
# quartic whose G(.; a) has two competing local maxima (secondary critical spike near 3.18)
TWO_WELL_QUARTIC = (0.0, 1.0, 2.5, -0.9, 0.11)


def fmt17(x: float) -> str:
    """Float formatted with 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Potential:
    coeffs: tuple  # ascending degree
    degree: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "degree", len(self.coeffs) - 1)

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {"coeffs": [float(fmt17(c)) for c in self.coeffs]}

    def to_json(self) -> str:
        return '{"coeffs": [' + ", ".join(fmt17(c) for c in self.coeffs) + "]}"

    def __call__(self, x, order: int = 0):
        return eval_potential(self, x, order)

    def deriv_coeffs(self, order: int) -> np.ndarray:
        return _deriv_coeffs(np.asarray(self.coeffs, dtype=float), order)


def make_potential(coeffs: Sequence[float]) -> Potential:
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) == 0:
        raise EmptyCoefficients("coefficient list is empty")
    deg = len(coeffs) - 1
    if deg < 2 or deg % 2 == 1:
        raise OddDegree(f"degree must be even and >= 2, got {deg}")
    if not coeffs[-1] > 0:
        raise NonpositiveLeading(f"leading coefficient must be > 0, got {coeffs[-1]}")
    return Potential(tuple(coeffs))


def potential_from_json(text: str | dict) -> Potential:
    d = json.loads(text) if isinstance(text, str) else text
    return make_potential(d["coeffs"])


def _deriv_coeffs(c: np.ndarray, order: int) -> np.ndarray:
    for _ in range(order):
        if len(c) <= 1:
            return np.zeros(1)
        c = c[1:] * np.arange(1, len(c))
    return c


def horner(c, x):
    x = np.asarray(x)
    out = np.zeros_like(x, dtype=np.result_type(x, float))
    for ck in c[::-1]:
        out = out * x + ck
    return out if out.ndim else out[()]


def eval_potential(V: Potential, x, order: int = 0):
    """order-th derivative of V at x (Horner on the differentiated coefficients)."""
    return horner(V.deriv_coeffs(order), x)


# short alias
eval = eval_potential


@dataclass
class ConditionReport:
    cond1_ok: bool
    cond2_ok: bool
    cond3_ok: bool
    cond4_ok: bool
    diagnostics: dict

    @property
    def all_ok(self) -> bool:
        return self.cond1_ok and self.cond2_ok and self.cond3_ok and self.cond4_ok

    def to_dict(self) -> dict:
        return {
            "cond1_ok": self.cond1_ok,
            "cond2_ok": self.cond2_ok,
            "cond3_ok": self.cond3_ok,
            "cond4_ok": self.cond4_ok,
            "diagnostics": self.diagnostics,
        }


def real_roots_on_grid(f, lo: float, hi: float, npts: int = 4096) -> list[float]:
    """Roots of f on [lo, hi] found by sign changes on a grid, polished by bisection."""
    from scipy.optimize import brentq

    xs = np.linspace(lo, hi, npts)
    ys = f(xs)
    roots = []
    for i in range(npts - 1):
        if ys[i] == 0.0:
            roots.append(float(xs[i]))
        elif ys[i] * ys[i + 1] < 0:
            roots.append(brentq(f, xs[i], xs[i + 1], xtol=1e-15))
    return roots


def check_conditions(V: Potential, eqm, horizon: float | None = None,
                     n_grid: int = 400) -> ConditionReport:
    """Grid checks of the four standing assumptions for (V, eqm)."""
    if eqm.potential_hash != V.hash:
        raise InconsistentInputs("equilibrium measure was computed for a different potential")
    from .equilibrium import verify_variational

    b1, b2 = eqm.b1, eqm.b2
    cond1 = V.degree % 2 == 0 and V.degree >= 2 and V.coeffs[-1] > 0

    xs = np.linspace(b1, b2, 2001)[1:-1]
    dens = eqm.h(xs) * np.sqrt((b2 - xs) * (xs - b1))
    min_dens = float(dens.min())
    cond2 = min_dens >= -1e-10

    roots = real_roots_on_grid(eqm.h, b1 - 2.0, b2 + 2.0)
    xg = np.linspace(b1 - 2.0, b2 + 2.0, 4096)
    min_abs_h = float(np.abs(eqm.h(xg)).min())
    cond3 = len(roots) == 0

    if horizon is None:
        horizon = 10.0 * (b2 - b1)
    rep = verify_variational(eqm, V, n_interior=n_grid, n_exterior=n_grid, horizon=horizon)
    cond4 = rep.exterior_margin > 0

    diag = {
        "cond1": {"degree": V.degree, "leading": V.coeffs[-1]},
        "cond2": {"min_density_on_support": min_dens},
        "cond3": {"real_roots_of_h": roots, "min_abs_h_on_grid": min_abs_h},
        "cond4": {"min_exterior_margin": rep.exterior_margin,
                  "interior_residual": rep.interior_residual, "horizon": horizon},
    }
    return ConditionReport(bool(cond1), bool(cond2), bool(cond3), bool(cond4), diag)
