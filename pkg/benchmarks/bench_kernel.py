"""Compare the compiled kernel with the numpy fallback.

    python benchmarks/bench_kernel.py --nmax 20,40,60 --nodes 4096

Reports seconds per call and microseconds per node for the basis tables and
for the full coefficient contraction, plus the largest difference between
the two backends.
"""
import argparse
import time

import numpy as np

from strayfield import bench, kernel, quadrature


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nmax", default="20,40,60")
    p.add_argument("--nodes", type=int, default=4096)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    case = bench.get_case(1)
    rule = quadrature.DEFAULT_POLICY.rule_for(case.domain, 60)
    nodes = np.ascontiguousarray(rule.nodes[: args.nodes])
    weights = rule.weights[: args.nodes]
    mvals = case.field(nodes)
    backends = kernel.available_backends()
    if len(backends) < 2:
        print("compiled kernel not available; timing the numpy fallback only")

    print(f"{'N':>3} {'backend':>9} {'tables s':>9} {'us/node':>8} {'coeffs s':>9} {'us/node':>8}")
    for n in (int(v) for v in args.nmax.split(",")):
        results = {}
        for b in backends:
            kernel.basis_tables(nodes[:8], n, backend=b)  # warm the constant cache
            t_tab, _ = _best(lambda: kernel.basis_tables(nodes, n, backend=b), args.repeat)
            t_cv, c = _best(lambda: kernel.coefficient_vector(nodes, weights, mvals, n, backend=b), args.repeat)
            results[b] = c
            per = 1e6 / len(nodes)
            print(f"{n:>3} {b:>9} {t_tab:9.3f} {t_tab * per:8.1f} {t_cv:9.3f} {t_cv * per:8.1f}")
        if len(results) == 2:
            diff = np.max(np.abs(results["compiled"] - results["python"]))
            print(f"    max |compiled - python| = {diff:.2e}")


if __name__ == "__main__":
    main()
