"""Compare the numba and numpy sampling backends.

Both backends are fed the same uniform matrix; the script reports the
per-call wall time of each and the largest relative difference between
their outputs.

    python3 benchmarks/bench_kernels.py --N 10000 100000 --n 10 30 --repeat 5
"""

from __future__ import annotations

import argparse
import json
import statistics
import time

import numpy as np

from tailrisk import kernels
from tailrisk.asymptotics import AsymptoticContext, asymptotic_quantile
from tailrisk.dist import ParetoShifted
from tailrisk.samplers import Algorithm, MixtureConfig, simulate_from_uniforms


def time_call(fn, repeat):
    fn()  # warm-up (includes numba compilation on first use)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run(Ns, ns, alpha, tail, repeat, seed):
    d = ParetoShifted(alpha)
    rows = []
    for n in ns:
        lam = asymptotic_quantile(AsymptoticContext(d, n), 1 - tail)
        for alg in Algorithm:
            cfg = MixtureConfig(alg, n, lam=lam)
            for N in Ns:
                u = np.random.default_rng(seed).random((N, cfg.uniforms_per_path))
                row = {"algorithm": alg.value, "n": n, "N": N}
                out = {}
                for backend in kernels.BACKENDS:
                    if backend == "numba" and not kernels.HAVE_NUMBA:
                        continue
                    row[f"{backend}_s"] = time_call(lambda: simulate_from_uniforms(d, cfg, u, backend), repeat)
                    out[backend] = simulate_from_uniforms(d, cfg, u, backend)
                if len(out) == 2:
                    a, b = out["numba"], out["numpy"]
                    row["speedup"] = row["numpy_s"] / row["numba_s"]
                    row["max_rel_diff"] = float(max(
                        np.max(np.abs(a.values - b.values) / np.maximum(np.abs(b.values), 1e-300)),
                        np.max(np.abs(a.weights - b.weights) / np.maximum(np.abs(b.weights), 1e-300)),
                    ))
                rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--N", type=int, nargs="+", default=[10_000, 100_000])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 30])
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--tail", type=float, default=1e-3, help="1 - p used to set the anchor")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print rows as JSON lines")
    args = ap.parse_args(argv)

    rows = run(args.N, args.n, args.alpha, args.tail, args.repeat, args.seed)
    if args.json:
        for r in rows:
            print(json.dumps(r))
        return
    print(f"{'algorithm':<12}{'n':>4}{'N':>9}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>9}{'max rel diff':>14}")
    for r in rows:
        print(f"{r['algorithm']:<12}{r['n']:>4}{r['N']:>9}{r.get('numba_s', float('nan')):>12.4f}"
              f"{r['numpy_s']:>12.4f}{r.get('speedup', float('nan')):>9.1f}{r.get('max_rel_diff', float('nan')):>14.2e}")


if __name__ == "__main__":
    main()
