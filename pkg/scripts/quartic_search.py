"""Random search for quartic potentials whose phase diagram has a two-maximizer point."""
import argparse
import warnings

import numpy as np

from spikedbeta.equilibrium import solve_equilibrium
from spikedbeta.errors import SpikedError
from spikedbeta.phase import critical_value, find_secondary_critical, maximizers
from spikedbeta.potential import check_conditions, make_potential


def candidate(rng):
    # V' = A(x^3 - 1.5(p+q)x^2 + 3pq x) + C has critical points near p and q
    p = rng.uniform(1.2, 2.5)
    q = p + rng.uniform(0.5, 2.5)
    A = rng.uniform(0.05, 2.0)
    C = rng.uniform(0.0, 4.0)
    return [0.0, C, 1.5 * A * p * q, -0.5 * A * (p + q), A / 4], p


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tries", type=int, default=400)
    ap.add_argument("--want", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    warnings.filterwarnings("ignore")
    rng = np.random.default_rng(args.seed)
    found = 0
    for _ in range(args.tries):
        co, p = candidate(rng)
        try:
            V = make_potential(co)
            eqm = solve_equilibrium(V)
            if eqm.b2 > p or not check_conditions(V, eqm).all_ok:
                continue
            a_c = critical_value(eqm, V)
            a0 = find_secondary_critical(eqm, V, a_c * (1 + 1e-6), a_c + 6, 300)
        except (SpikedError, ArithmeticError, ValueError):
            continue
        mx = maximizers(eqm, V, a0)
        print(np.round(co, 5).tolist(), "a_c", a_c, "a0", a0, [m[0] for m in mx], flush=True)
        found += 1
        if found >= args.want:
            break


if __name__ == "__main__":
    main()
