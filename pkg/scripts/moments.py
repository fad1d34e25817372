"""Monte Carlo G-moments E #Sur(cok(M) (x) Z/a, G) against their limits.

Targets: |Sym^2 G| for skew, |Wedge^2 G| for symmetric, 1 for iid.
"""

import argparse

from randcok.abelian import AbelianGroup
from randcok.experiments import compare, run_moment
from randcok.models import ModelSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--models", nargs="+", default=["skew", "symmetric", "iid"])
    ap.add_argument("--groups", nargs="+", default=["Z/2", "Z/3", "Z/2 x Z/2", "Z/4"])
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print("model      group        a  estimate   95% CI               target  z")
    for kind in args.models:
        for text in args.groups:
            G = AbelianGroup.parse(text)
            a = G.exponent
            res = run_moment(ModelSpec(kind, args.n), G, a, args.trials, args.seed)
            z = compare(res, res.target).value if res.target is not None else float("nan")
            lo, hi = res.ci
            print(f"{kind:<10} {text:<12} {a:<2} {res.estimate:<10.4f} [{lo:.4f}, {hi:.4f}]   "
                  f"{res.target:<7g} {z:+.2f}")


if __name__ == "__main__":
    main()
