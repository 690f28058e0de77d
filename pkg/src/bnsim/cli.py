"""Command-line front end: gen, exact, sample and bench subcommands."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import netgen, oracle, scoring
from .errors import EnumerationGuardError, NetworkError
from .model import load_evidence, load_network, save_network
from .samplers import RunConfig, SchemeKind, ScoringRule, run

SCHEME_NAMES = [s.value for s in SchemeKind]
SCORING_NAMES = [s.value for s in ScoringRule]

# sample-count sweep used by bench when --ms is not given
DEFAULT_MS = list(range(100, 1001, 100)) + list(range(2000, 10001, 1000))


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _add_run_flags(p):
    p.add_argument("--evidence", metavar="FILE",
                   help="evidence file: one '<name> <value-index>' per line")
    p.add_argument("--ordering", choices=["plain", "weighted"],
                   default="plain",
                   help="topological tie-breaking: id order or table weight")
    point = p.add_mutually_exclusive_group()
    point.add_argument("--median", dest="point_rule", action="store_const",
                       const="median", default="median",
                       help="stratum midpoints (default)")
    point.add_argument("--random", dest="point_rule", action="store_const",
                       const="random", help="random point per stratum")
    p.add_argument("--burn-in", type=int, default=0, metavar="N",
                   help="unscored Gibbs sweeps before scoring starts")
    p.add_argument("--backend", choices=["auto", "c", "py"], default="auto")
    p.add_argument("--cpt", choices=["tree", "dense"], default="tree",
                   help="CPT representation used by the sampler")
    p.add_argument("--max-enum", type=int, default=oracle.ENUM_GUARD,
                   metavar="N", help="exact-enumeration variable guard")


def _load(args):
    net = load_network(Path(args.net).read_text())
    ev = {}
    if args.evidence:
        ev = load_evidence(Path(args.evidence).read_text(), net)
    return net, ev


def _print_marginals(net, table, out):
    width = max(len(v.name) for v in net.variables)
    for v in net.variables:
        row = " ".join(f"{table[v.id][k]:.6f}" for k in range(v.arity))
        print(f"{v.name:<{width}}  {row}", file=out)


def cmd_gen(args):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        net = netgen.generate(netgen.GenConfig(n=args.n, arity=args.arity,
                                               seed=args.seed + i))
        path = out_dir / f"{net.name}.net"
        path.write_text(save_network(net))
        print(path)
    return 0


def cmd_exact(args):
    net, ev = _load(args)
    table = oracle.exact_marginals(net, ev, method="enumerate",
                                   max_vars=args.max_enum)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        _print_marginals(net, table, out)
    finally:
        if args.out:
            out.close()
    return 0


def _run_config(args, scheme=None, scoring_rule=None, m=None, seed=None):
    return RunConfig(
        scheme=SchemeKind(scheme if scheme is not None else args.scheme),
        m=m if m is not None else args.m,
        scoring=ScoringRule(scoring_rule if scoring_rule is not None
                            else args.scoring),
        seed=seed if seed is not None else args.seed,
        point_rule=args.point_rule,
        weighted_ordering=args.ordering == "weighted",
        burn_in=args.burn_in,
        rep=args.cpt,
        backend=args.backend)


def cmd_sample(args):
    net, ev = _load(args)
    cfg = _run_config(args)
    result = run(net, ev, cfg)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        print(f"net {net.name}  scheme {cfg.scheme.value}  scoring "
              f"{cfg.scoring.value}  m {cfg.m}  seed {cfg.seed}  backend "
              f"{result.stats.backend}", file=out)
        _print_marginals(net, result.marginals, out)
        try:
            exact = oracle.exact_marginals(net, ev, max_vars=args.max_enum)
            div = scoring.divergence(exact, result.marginals, net.arities,
                                     exclude=ev)
            print(f"divergence vs exact: {div:.6e}", file=out)
        except EnumerationGuardError:
            print("divergence vs exact: NA (enumeration guard)", file=out)
        st = result.stats
        print(f"assignments {st.assignments}  comparisons {st.comparisons}  "
              f"lookups {st.lookups}  init {st.init_assignments}  "
              f"time {st.wall_ms:.3f} ms", file=out)
        if cfg.scheme is SchemeKind.PEARL \
                and cfg.scoring is ScoringRule.BLANKET:
            print("blanket scores reused from the sweep (no extra lookups)",
                  file=out)
    finally:
        if args.out:
            out.close()
    return 0


def _bench_nets(args):
    nets = []
    for path in args.net or []:
        net = load_network(Path(path).read_text())
        nets.append((net.name, net))
    if args.gen_count:
        for i in range(args.gen_count):
            net = netgen.generate(netgen.GenConfig(
                n=args.gen_n, arity=args.arity, seed=args.gen_seed + i))
            nets.append((net.name, net))
    if not nets:
        raise SystemExit("bench: need --net files or --gen-count")
    return nets


def _bench_cell(net, ev, args, scheme, scoring_rule, m, seed):
    row = {"network": net.name, "scheme": scheme, "scoring": scoring_rule,
           "m": m, "seed": seed, "divergence": "NA", "time_ms": "NA",
           "assignments": 0, "comparisons": 0, "error": ""}
    try:
        cfg = _run_config(args, scheme, scoring_rule, m, seed)
        result = run(net, ev, cfg)
        row["assignments"] = result.stats.assignments
        row["comparisons"] = result.stats.comparisons
        row["time_ms"] = f"{result.stats.wall_ms:.3f}"
        try:
            exact = oracle.exact_marginals(net, ev, max_vars=args.max_enum)
            row["divergence"] = repr(float(scoring.divergence(
                exact, result.marginals, net.arities, exclude=ev)))
        except EnumerationGuardError:
            pass
    except (NetworkError, ValueError) as exc:
        row["error"] = str(exc)
    return row


def cmd_bench(args):
    nets = _bench_nets(args)
    schemes = args.schemes.split(",") if args.schemes else SCHEME_NAMES
    for s in schemes:
        if s not in SCHEME_NAMES:
            raise SystemExit(f"bench: unknown scheme '{s}'")
    if not schemes:
        raise SystemExit("bench: empty scheme list")
    scorings = args.scorings.split(",") if args.scorings else ["simple"]
    for s in scorings:
        if s not in SCORING_NAMES:
            raise SystemExit(f"bench: unknown scoring '{s}'")
    ms = _int_list(args.ms) if args.ms else DEFAULT_MS
    if any(b <= a for a, b in zip(ms, ms[1:])) or any(m < 1 for m in ms):
        raise SystemExit("bench: sample counts must be positive and "
                         "strictly increasing")
    seeds = _int_list(args.seeds) if args.seeds else [0]

    cells = [(name, net, scheme, scoring_rule, m, seed)
             for name, net in nets
             for scheme in schemes
             for scoring_rule in scorings
             for m in ms
             for seed in seeds]

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.DictWriter(out, fieldnames=[
        "network", "scheme", "scoring", "m", "seed", "divergence",
        "time_ms", "assignments", "comparisons", "error"])
    writer.writeheader()
    try:
        if args.workers > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                futures = []
                for name, net, scheme, scoring_rule, m, seed in cells:
                    ev_net = (load_evidence(
                        Path(args.evidence).read_text(), net)
                        if args.evidence else {})
                    futures.append(pool.submit(
                        _bench_cell_text, save_network(net), ev_net, args,
                        scheme, scoring_rule, m, seed))
                for fut in futures:
                    row = fut.result()
                    row["time_ms"] = "NA"   # pool timing is not comparable
                    writer.writerow(row)
                    out.flush()
        else:
            for name, net, scheme, scoring_rule, m, seed in cells:
                ev_net = (load_evidence(Path(args.evidence).read_text(), net)
                          if args.evidence else {})
                writer.writerow(_bench_cell(net, ev_net, args, scheme,
                                            scoring_rule, m, seed))
                out.flush()
    finally:
        if args.out:
            out.close()
    return 0


def _bench_cell_text(net_text, ev, args, scheme, scoring_rule, m, seed):
    return _bench_cell(load_network(net_text), ev, args, scheme,
                       scoring_rule, m, seed)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bnsim",
        description="belief network inference by stochastic simulation")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate random polytree networks")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--arity", type=int, default=2)
    g.add_argument("--out-dir", default=".")
    g.set_defaults(fn=cmd_gen)

    e = sub.add_parser("exact", help="posterior marginals by enumeration")
    e.add_argument("--net", required=True)
    e.add_argument("--out")
    _add_run_flags(e)
    e.set_defaults(fn=cmd_exact)

    s = sub.add_parser("sample", help="run one simulation scheme")
    s.add_argument("--net", required=True)
    s.add_argument("--scheme", choices=SCHEME_NAMES, required=True)
    s.add_argument("--scoring", choices=SCORING_NAMES, default="simple")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    _add_run_flags(s)
    s.set_defaults(fn=cmd_sample)

    b = sub.add_parser("bench", help="scheme x m x network sweep to CSV")
    b.add_argument("--net", action="append",
                   help="network file (repeatable)")
    b.add_argument("--gen-n", type=int, default=50)
    b.add_argument("--gen-count", type=int, default=0,
                   help="generate this many networks instead of --net")
    b.add_argument("--gen-seed", type=int, default=0)
    b.add_argument("--arity", type=int, default=2)
    b.add_argument("--schemes", help="comma list, default: all five")
    b.add_argument("--scorings", help="comma list, default: simple")
    b.add_argument("--ms", help="comma list of sample counts, "
                   "default: 100..1000/100 then 2000..10000/1000")
    b.add_argument("--seeds", help="comma list of seeds, default: 0")
    b.add_argument("--workers", type=int, default=1,
                   help="parallel cells (disables the wall-time column)")
    b.add_argument("--out")
    _add_run_flags(b)
    b.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except NetworkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
