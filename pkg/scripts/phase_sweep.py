"""Sweep the spike strength and print the regime, c(a) and maximizers as CSV."""
import argparse
import sys

import numpy as np

from spikedbeta.equilibrium import solve_equilibrium
from spikedbeta.phase import classify, critical_value
from spikedbeta.potential import REFERENCE_QUARTIC, TWO_WELL_QUARTIC, make_potential

NAMED = {"gaussian": (0.0, 0.0, 1.0), "reference-quartic": REFERENCE_QUARTIC,
         "two-well-quartic": TWO_WELL_QUARTIC}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--potential", default="two-well-quartic", choices=sorted(NAMED))
    p.add_argument("--a-min", type=float, default=0.25)
    p.add_argument("--a-max", type=float, default=5.0)
    p.add_argument("--count", type=int, default=40)
    args = p.parse_args(argv)
    V = make_potential(NAMED[args.potential])
    eqm = solve_equilibrium(V)
    a_c = critical_value(eqm, V)
    out = sys.stdout
    out.write(f"# support: [{float(eqm.b1)!r}, {float(eqm.b2)!r}]\n# a_c: {float(a_c)!r}\n")
    out.write("a,regime,c_of_a,n_maximizers,locations\n")
    for a in np.linspace(args.a_min, args.a_max, args.count):
        rep = classify(eqm, V, float(a), a_c=a_c)
        locs = ";".join(f"{m[0]:.10g}" for m in rep.maximizers)
        out.write(f"{a:.10g},{rep.regime},{rep.c_of_a:.10g},{len(rep.maximizers)},{locs}\n")


if __name__ == "__main__":
    main()
