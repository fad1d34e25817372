"""Command-line front end.

JSON and CSV outputs are the stable interfaces; text output is for people.
Exit status: 0 on success, 2 on invalid input, 1 on a runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction

from . import anticoncentration as ac
from . import theory
from .experiments import (
    STATISTICS,
    ExperimentSpec,
    compare,
    reproduce_table1,
    run_exhaustive,
    run_monte_carlo,
    run_rank_chain,
)
from .linalg import IntegerMatrix, cokernel, snf
from .models import KINDS, EntryDistribution, GraphSample, ModelSpec
from .sandpile import sandpile_group, spanning_tree_count

SEED_ENV = "RANDCOK_SEED"


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
        return
    # write-then-rename so a failure never leaves a partial file behind
    d = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".randcok-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _matrix(path: str) -> IntegerMatrix:
    try:
        return IntegerMatrix.parse(_read(path))
    except (ValueError, json.JSONDecodeError) as e:
        raise UsageError(f"bad matrix file: {e}")


def _graph(args) -> GraphSample:
    try:
        if args.edges is not None:
            return GraphSample.parse_edges(args.edges, args.vertices)
        if args.graph is None:
            raise UsageError("give a graph file or --edges")
        text = _read(args.graph).strip()
        if text.startswith("["):
            return GraphSample.from_adjacency_json(text)
        return GraphSample.parse_edges(text, args.vertices)
    except (ValueError, json.JSONDecodeError) as e:
        raise UsageError(f"bad graph: {e}")


def _dist(text: str | None) -> EntryDistribution | None:
    """``"0,1"`` for a uniform law, or a JSON list of ``[value, prob]`` pairs."""
    if text is None:
        return None
    text = text.strip()
    try:
        if text.startswith("["):
            return EntryDistribution.from_json(text)
        return EntryDistribution.uniform([int(v) for v in text.split(",")])
    except (ValueError, json.JSONDecodeError) as e:
        raise UsageError(f"bad --dist: {e}")


def _model(args, base: dict | None = None) -> ModelSpec:
    data = dict(base or {})
    if args.model is not None:
        data["kind"] = args.model
    if args.n is not None:
        data["n"] = args.n
    if args.q is not None:
        data["q"] = args.q
    if args.dist is not None:
        data["dist"] = _dist(args.dist).to_json()
    if "kind" not in data or "n" not in data:
        raise UsageError("--model and --n are required")
    try:
        return ModelSpec.from_json(data)
    except (ValueError, KeyError) as e:
        raise UsageError(str(e))


def _spec(args) -> ExperimentSpec:
    base: dict = {}
    if args.spec is not None:
        try:
            base = json.loads(_read(args.spec))
        except json.JSONDecodeError as e:
            raise UsageError(f"bad spec file: {e}")
    data = dict(base)
    data["model"] = _model(args, base.get("model")).to_json()
    if args.statistic is not None:
        data["statistic"] = args.statistic
    if "statistic" not in data:
        raise UsageError("--statistic is required")
    if args.prime:
        data["primes"] = args.prime
    if args.group is not None:
        data["group"] = args.group
    if args.modulus is not None:
        data["modulus"] = args.modulus
    if args.trials is not None:
        data["trials"] = args.trials
    if args.connected:
        data["connected"] = True
    if args.seed is not None or "seed" not in data:
        data["seed"] = _seed(args)
    try:
        return ExperimentSpec.from_json(data)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(str(e))


def _target(text: str | None):
    if text is None:
        return None
    if text in theory.NAMED_CONSTANTS:
        return theory.NAMED_CONSTANTS[text][1]()
    try:
        return float(Fraction(text))
    except ValueError:
        raise UsageError(f"--target must be a number or one of {sorted(theory.NAMED_CONSTANTS)}")


# -------------------------------------------------------------- subcommands


def cmd_snf(args) -> str:
    M = _matrix(args.file)
    sf = snf(M)
    m, n = sf.shape
    diag = list(sf.invariant_factors) + [0] * (min(m, n) - sf.rank)
    if args.format == "json":
        return _json({"invariant_factors": list(sf.invariant_factors), "rank": sf.rank,
                      "shape": [m, n], "diagonal": diag})
    return " ".join(map(str, diag))


def cmd_cokernel(args) -> str:
    G = cokernel(_matrix(args.file))
    if args.format == "json":
        return _json({"group": str(G), "free_rank": G.free_rank, "torsion": list(G.torsion)})
    return str(G)


def cmd_sandpile(args) -> str:
    g = _graph(args)
    if g.vertices == 0:
        raise UsageError("empty graph")
    G = sandpile_group(g)
    if args.format == "json":
        return _json({"group": str(G), "free_rank": G.free_rank, "torsion": list(G.torsion),
                      "order": G.order if G.is_finite else None})
    return str(G)


def cmd_spanning_trees(args) -> str:
    t = spanning_tree_count(_graph(args))
    return _json({"spanning_trees": t}) if args.format == "json" else str(t)


def cmd_theory(args) -> str:
    name = args.name
    if name in theory.NAMED_CONSTANTS:
        label, fn = theory.NAMED_CONSTANTS[name]
        return _json(fn().as_dict(label))
    if name in theory.NAMED_LAWS:
        if args.prime is None:
            raise UsageError(f"{name} needs --prime")
        p = args.prime[0]
        try:
            if args.n is not None:
                fin = {"mu-sym": theory.mu_sym_finite, "mu-alt-even": theory.mu_alt_finite,
                       "mu-alt-odd": theory.mu_alt_finite}[name]
                law = fin(args.n, p)
            else:
                law = theory.NAMED_LAWS[name](p)
        except ValueError as e:
            raise UsageError(str(e))
        if args.format == "csv":
            return _csv(["k", "prob"], [[k, float(law.prob(k))] for k in law.support()])
        return _json(law.as_dict())
    raise UsageError(f"unknown name {name!r}; constants: {sorted(theory.NAMED_CONSTANTS)}, "
                     f"laws: {sorted(theory.NAMED_LAWS)}")


def cmd_simulate(args) -> str:
    spec = _spec(args)
    target = _target(args.target)
    res = run_monte_carlo(spec, args.threads)
    if target is not None:
        v = compare(res, target, args.threshold)
        res = res.with_verdict(v, float(target))
    if args.format == "csv":
        return _csv(["outcome", "count"], [[k, c] for k, c in res.as_dict()["counts"].items()])
    return _json(res.as_dict())


def cmd_exhaustive(args) -> str:
    spec = _spec(args)
    try:
        law = run_exhaustive(spec)
    except ValueError as e:
        raise UsageError(str(e))
    if args.format == "csv":
        return _csv(["outcome", "prob"], list(law.as_dict()["law"].items()))
    return _json(law.as_dict())


def cmd_rank_chain(args) -> str:
    model = _model(args)
    if not args.prime:
        raise UsageError("--prime is required")
    try:
        rec = run_rank_chain(model, args.prime[0], args.n0, _seed(args), args.chains)
    except ValueError as e:
        raise UsageError(str(e))
    if args.format == "csv":
        return _csv(["corank", "rank_increment", "count"],
                    [[k, d, c] for (k, d), c in sorted(rec.transitions.items())])
    return _json(rec.as_dict())


def cmd_rho(args) -> str:
    if not args.prime:
        raise UsageError("--prime is required")
    p = args.prime[0]
    try:
        w = ac.FpVector(p, tuple(int(x) for x in args.vector.replace(",", " ").split()))
    except ValueError as e:
        raise UsageError(f"bad --vector or --prime: {e}")
    try:
        alpha = ac._alpha(Fraction(args.alpha))
    except ValueError as e:
        raise UsageError(str(e))
    out: dict = {"p": p, "alpha": float(alpha), "n": len(w), "mode": args.mode}
    if args.mode == "exact":
        if p > ac.EXACT_MAX_P:
            raise UsageError("exact mode needs p <= 2^24; use --mode sampled")
        out["rho"] = ac.rho(w, alpha)
        out["rho_L"] = ac.rho_L(w, alpha) if p <= ac.RHO_L_MAX_P else None
    else:
        import numpy as np

        est, err = ac.rho_sampled(w, alpha, args.samples, np.random.default_rng(_seed(args)))
        out["rho"], out["stderr"], out["rho_L"] = est, err, None
    if args.n_prime is not None:
        if not 1 <= args.n_prime <= len(w):
            raise UsageError("--n-prime must lie in [1, N]")
        g = ac.gap_extract(w, alpha, args.n_prime, args.delta)
        out["gap"] = g.as_dict()
    return _json(out)


def cmd_reproduce(args) -> str:
    if args.what != "table1":
        raise UsageError("only 'table1' can be reproduced")
    rows = reproduce_table1(tuple(args.n_list), tuple(args.q_list), args.trials or 2000,
                            _seed(args), not args.unconditioned, args.threads)
    if args.format == "csv":
        return _csv(["n", "q", "estimate", "lo", "hi"], [[r.n, r.q, r.estimate, r.lo, r.hi] for r in rows])
    return _json([r.as_dict() for r in rows])


# ------------------------------------------------------------------- parser


def _common(p, fmt="text"):
    p.add_argument("--format", choices=("json", "csv", "text"), default=fmt)
    p.add_argument("--out", help="write output here instead of stdout")


def _graph_args(p):
    p.add_argument("graph", nargs="?", help="edge list ('u v' per line) or JSON adjacency; '-' for stdin")
    p.add_argument("--edges", help='inline edge list, e.g. "0 1,1 2,2 0"')
    p.add_argument("--vertices", type=int, help="vertex count (default: 1 + largest label)")


def _model_args(p):
    p.add_argument("--model", choices=KINDS)
    p.add_argument("--n", type=int, help="matrix size (graph models use n + 1 vertices)")
    p.add_argument("--q", type=float, help="edge probability for graph models (default 0.5)")
    p.add_argument("--dist", help='entry law: "0,1" (uniform) or JSON [[value, "p"], ...]')
    p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or 0")


def _spec_args(p):
    p.add_argument("spec", nargs="?", help="experiment spec JSON (flags override it)")
    _model_args(p)
    p.add_argument("--statistic", choices=STATISTICS)
    p.add_argument("--prime", type=int, action="append", help="repeatable")
    p.add_argument("--group", help='finite abelian group, e.g. "Z/2" or "Z/2 x Z/4"')
    p.add_argument("--modulus", type=int, help="a in cok (x) Z/a for sur_count_mod_a")
    p.add_argument("--trials", type=int)
    p.add_argument("--connected", action="store_true", help="condition graph models on connectedness")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randcok", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("snf", help="Smith normal form of an integer matrix file")
    p.add_argument("file", help="'rows cols' then entries, or a JSON array of arrays; '-' for stdin")
    _common(p)
    p.set_defaults(func=cmd_snf)

    p = sub.add_parser("cokernel", help="cokernel Z^m / M Z^n of an integer matrix file")
    p.add_argument("file")
    _common(p)
    p.set_defaults(func=cmd_cokernel)

    p = sub.add_parser("sandpile", help="sandpile group of an undirected graph")
    _graph_args(p)
    _common(p)
    p.set_defaults(func=cmd_sandpile)

    p = sub.add_parser("spanning-trees", help="number of spanning trees")
    _graph_args(p)
    _common(p)
    p.set_defaults(func=cmd_spanning_trees)

    p = sub.add_parser("theory", help="limiting constants and corank laws")
    p.add_argument("name", help="constant (cyclic-sym, ...) or law (mu-sym, ...)")
    p.add_argument("--prime", type=int, action="append")
    p.add_argument("--n", type=int, help="finite size for the exact finite-n law")
    _common(p, "json")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of a cokernel statistic")
    _spec_args(p)
    p.add_argument("--target", help="number or named constant to compare against")
    p.add_argument("--threshold", type=float, help="|z| threshold (default 3)")
    _common(p, "json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exhaustive", help="exact law of a statistic by enumeration")
    _spec_args(p)
    _common(p, "json")
    p.set_defaults(func=cmd_exhaustive)

    p = sub.add_parser("rank-chain", help="corank mod p along growing leading minors")
    _model_args(p)
    p.add_argument("--prime", type=int, action="append")
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--chains", type=int, default=1)
    _common(p, "json")
    p.set_defaults(func=cmd_rank_chain)

    p = sub.add_parser("rho", help="concentration discrepancy of a vector over F_p")
    p.add_argument("--vector", required=True, help='coordinates, e.g. "1,2,3"')
    p.add_argument("--prime", type=int, action="append")
    p.add_argument("--alpha", default="1/2")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--n-prime", type=int, help="also extract a progression missing at most this many coordinates")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--seed", type=int)
    _common(p, "json")
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("reproduce", help="rerun a published table")
    p.add_argument("what", choices=("table1",))
    p.add_argument("--n", dest="n_list", type=int, nargs="+", default=[15, 30, 45, 60])
    p.add_argument("--q", dest="q_list", type=float, nargs="+", default=[0.3, 0.5, 0.7])
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--unconditioned", action="store_true", help="do not condition on connectedness")
    _common(p, "json")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        text = args.func(args)
    except (UsageError, ValueError) as e:
        print(f"randcok {args.command}: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"randcok {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    try:
        _emit(text, args.out)
    except OSError as e:
        print(f"randcok {args.command}: cannot write output: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
