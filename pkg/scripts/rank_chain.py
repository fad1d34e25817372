"""Rank evolution mod p along growing leading minors.

For each corank k with enough visits, prints the frequency of a zero rank
increment and of an increment at most one, next to the limiting values
(symmetric: p^-(k+1) and p^-k; skew: p^-k for both).
"""

import argparse

from randcok.experiments import run_rank_chain
from randcok.models import ModelSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--models", nargs="+", default=["symmetric", "skew"])
    ap.add_argument("--prime", type=int, default=3)
    ap.add_argument("--n0", type=int, default=10)
    ap.add_argument("--n", type=int, default=60)
    ap.add_argument("--chains", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-visits", type=int, default=30)
    args = ap.parse_args()
    p = args.prime

    for kind in args.models:
        rec = run_rank_chain(ModelSpec(kind, args.n), p, args.n0, args.seed, args.chains)
        print(f"# {kind} p={p} N={args.n0}..{args.n} chains={rec.chains}")
        print(f"increments seen: {sorted({d for _, d in rec.transitions})}")
        print("k  visits   P(d=0)   CI                  limit    P(d<=1)  CI                  limit")
        for k in range(args.n + 1):
            n = rec.visits(k)
            if n < args.min_visits:
                continue
            s, (slo, shi), _ = rec.stay(k)
            a, (alo, ahi), _ = rec.at_most_one(k)
            stay_lim = p ** -(k + 1) if kind == "symmetric" else p**-k
            print(f"{k:<2} {n:<8} {s:.5f}  [{slo:.5f}, {shi:.5f}]  {stay_lim:.5f}  "
                  f"{a:.5f}  [{alo:.5f}, {ahi:.5f}]  {p ** -k:.5f}")
        print("terminal corank law:", {k: round(v, 4) for k, v in sorted(rec.terminal().items())}, "\n")


if __name__ == "__main__":
    main()
