"""Compare sampled largest eigenvalues with the predicted limit law over several n."""
import argparse

from spikedbeta.equilibrium import solve_equilibrium
from spikedbeta.limit_laws import predict_limit
from spikedbeta.potential import make_potential
from spikedbeta.sampler import ks_compare, sample_gaussian_spiked


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--beta", type=int, default=2, choices=(1, 2, 4))
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--ns", type=int, nargs="+", default=[50, 100, 200])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    V = make_potential((0.0, 0.0, 1.0))
    eqm = solve_equilibrium(V)
    law = predict_limit(eqm, V, args.a, beta=args.beta)
    loc = law.components[0].location
    print("n,mean,n_times_offset,std,predicted_std,ks_D")
    for n in args.ns:
        s = sample_gaussian_spiked(n, args.beta, args.a, args.trials, seed=args.seed)
        D, info = ks_compare(s, law)
        print(f"{n},{info['mean']:.6f},{n * (info['mean'] - loc):.4f},{info['std']:.6f},"
              f"{info['law_scales'][0]:.6f},{D:.4f}")


if __name__ == "__main__":
    main()
