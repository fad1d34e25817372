"""Empirical corank mod p of symmetric and skew matrices against the limiting laws.

Prints one row per corank with the empirical frequency, the limit and the
exact finite-n law, then the total variation distance for each model.
"""

import argparse

from randcok.experiments import ExperimentSpec, compare, run_monte_carlo
from randcok.models import ModelSpec
from randcok.theory import mu_alt_even, mu_alt_finite, mu_alt_odd, mu_sym, mu_sym_finite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--prime", type=int, default=2)
    ap.add_argument("--trials", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    p = args.prime

    skew_limit = mu_alt_even(p) if args.n % 2 == 0 else mu_alt_odd(p)
    for kind, limit, finite in (("symmetric", mu_sym(p), mu_sym_finite), ("skew", skew_limit, mu_alt_finite)):
        spec = ExperimentSpec(ModelSpec(kind, args.n), "corank_mod_p", args.trials, args.seed, primes=(p,))
        res = run_monte_carlo(spec)
        emp = res.distribution()
        fin = finite(args.n, p) if args.n <= 12 else None
        print(f"# {kind} n={args.n} p={p} trials={args.trials}")
        print("k  empirical  limit     finite_n")
        for k in range(max(max(emp), 6) + 1):
            f = f"{float(fin.prob(k)):.6f}" if fin else "-"
            print(f"{k:<2} {emp.get(k, 0.0):.6f}   {limit.prob(k):.6f}  {f}")
        v = compare(res, limit)
        print(f"TV = {v.value:.4f}  ({v.label} at {v.threshold})\n")


if __name__ == "__main__":
    main()
