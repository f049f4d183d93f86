"""Command-line entry point: ``ccdist <subcommand> [flags]``.

Exit codes: 0 all checks pass, 2 a bound check failed, 3 precondition
error, 4 internal invariant violation.
"""
import argparse
import json
import sys

from .errors import PreconditionError
from .generators import KINDS, generate
from .harness import (ALGORITHMS, EXIT_INVARIANT, EXIT_OK, EXIT_PRECONDITION, ExperimentConfig,
                      run_experiment, scaling_sweep)

SUBCOMMANDS = ("mm", "filtered-mm", "knearest", "srcdetect", "through", "hopset", "mssp",
               "apsp-w", "apsp-u", "sssp", "diameter", "oracle")


def _common(p):
    p.add_argument("--n", type=int, default=16, help="number of nodes (default 16)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generator", choices=KINDS, default="random-weighted")
    p.add_argument("--p", type=float, default=None, help="edge probability (default 3/n)")
    p.add_argument("--max-weight", type=int, default=10)
    p.add_argument("--connected", action="store_true", help="lay down a random spanning tree first")
    p.add_argument("--graph", metavar="FILE", help="read the graph from an edge-list file")
    p.add_argument("--out", metavar="FILE", help="write output here instead of stdout")


def _algo_flags(p):
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--sources", type=int, default=None, help="number of sources (default ceil(sqrt n))")
    p.add_argument("--d", type=int, default=None, help="hop bound for srcdetect (default n)")
    p.add_argument("--cost-route", type=int, default=None)
    p.add_argument("--cost-sort", type=int, default=None)
    p.add_argument("--cost-hit", type=int, default=None)
    p.add_argument("--oracle-cap", type=int, default=128)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    p.set_defaults(fmt="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccdist", description="Congested Clique distance algorithms")
    sub = ap.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gen", help="generate a graph file")
    _common(g)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run {name} and check its bounds")
        _common(p)
        _algo_flags(p)
    s = sub.add_parser("sweep", help="charged rounds over several n with a fitted constant")
    _common(s)
    _algo_flags(s)
    s.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    s.add_argument("--ns", default="16,32,64")
    s.add_argument("--seeds", default="0,1,2")
    return ap


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args, algorithm) -> ExperimentConfig:
    return ExperimentConfig(
        algorithm=algorithm, n=args.n, seed=args.seed, generator=args.generator, p=args.p,
        max_weight=args.max_weight, connected=args.connected, graph_file=args.graph, eps=args.eps,
        k=args.k, sources=args.sources, d=args.d, cost_route=args.cost_route, cost_sort=args.cost_sort,
        cost_hit=args.cost_hit, oracle_cap=args.oracle_cap, csv=args.fmt == "csv")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            g = generate(args.generator, args.n, args.seed, p=args.p, max_weight=args.max_weight,
                         connected=args.connected)
            _emit(g.dumps(), args.out)
            return EXIT_OK
        if args.command == "sweep":
            ns = [int(x) for x in args.ns.split(",") if x]
            seeds = [int(x) for x in args.seeds.split(",") if x]
            res = scaling_sweep(args.algorithm, ns, seeds, _config(args, args.algorithm))
            text = res.csv_text() if args.fmt == "csv" else json.dumps(res.to_json(), indent=2) + "\n"
            _emit(text, args.out)
            return EXIT_OK if res.passed else 2
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # invariant failures inside a sweep
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    rep = run_experiment(_config(args, args.command))
    text = rep.csv_text() if args.fmt == "csv" else json.dumps(rep.to_json(), indent=2) + "\n"
    _emit(text, args.out)
    if rep.error:
        print(f"error: {rep.error['type']}: {rep.error['message']}", file=sys.stderr)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
