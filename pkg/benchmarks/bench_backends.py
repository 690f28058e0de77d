"""Compare the compiled kernel against the pure-Python fallback.

Also reports dense-array versus search-tree table storage, with and
without evidence absorption, as wall time per run.  Results are
informational; correctness parity is enforced by the test suite.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from bnsim import RunConfig, SchemeKind, run
from bnsim import backend
from bnsim.netgen import GenConfig, generate


def time_run(net, ev, cfg, repeats):
    best = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = run(net, ev, cfg)
        best.append(time.perf_counter() - t0)
    return min(best) * 1000.0, result


def backend_table(net, m, repeats):
    print(f"\n== backend comparison: n={net.n}, m={m} "
          f"(best of {repeats}, ms) ==")
    print(f"{'scheme':<18} {'compiled':>10} {'python':>10} {'speedup':>9}")
    for scheme in SchemeKind:
        cfg_c = RunConfig(scheme=scheme, m=m, seed=1, backend="c",
                          burn_in=100 if scheme is SchemeKind.PEARL else 0)
        cfg_p = RunConfig(scheme=scheme, m=m, seed=1, backend="py",
                          burn_in=100 if scheme is SchemeKind.PEARL else 0)
        ms_c, res_c = time_run(net, {}, cfg_c, repeats)
        ms_p, res_p = time_run(net, {}, cfg_p, repeats)
        assert np.array_equal(res_c.marginals, res_p.marginals), \
            "backends diverged"
        print(f"{scheme.value:<18} {ms_c:>10.2f} {ms_p:>10.2f} "
              f"{ms_p / ms_c:>8.1f}x")


def representation_table(net, m, repeats):
    leaf = next(i for i in range(net.n) if not net.children[i])
    ev = {leaf: 0}
    print(f"\n== table storage comparison: n={net.n}, m={m}, one observed "
          f"leaf (compiled backend, best of {repeats}, ms) ==")
    print(f"{'scheme':<18} {'dense':>10} {'tree':>10} {'tree/dense':>11}")
    for scheme in SchemeKind:
        cfg_d = RunConfig(scheme=scheme, m=m, seed=1, rep="dense")
        cfg_t = RunConfig(scheme=scheme, m=m, seed=1, rep="tree")
        ms_d, res_d = time_run(net, ev, cfg_d, repeats)
        ms_t, res_t = time_run(net, ev, cfg_t, repeats)
        assert np.array_equal(res_d.marginals, res_t.marginals), \
            "representations diverged"
        print(f"{scheme.value:<18} {ms_d:>10.2f} {ms_t:>10.2f} "
              f"{ms_t / ms_d:>10.2f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    if not backend.HAVE_COMPILED:
        raise SystemExit("compiled kernel not built; nothing to compare")
    m = 2000 if args.quick else 20000
    repeats = 2 if args.quick else 3
    net = generate(GenConfig(n=50, seed=0))
    backend_table(net, m, repeats)
    representation_table(net, m, repeats)


if __name__ == "__main__":
    main()
