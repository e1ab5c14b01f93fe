"""Compare the compiled and pure-numpy kernels on sector-sized workloads.

    python3 benchmarks/bench_kernels.py [--L 16 18 20] [--repeat 3] [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from noclick import _kernels_py

try:
    from noclick import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(L):
    # zero momentum, even spin inversion, even reflection: the largest symmetric block users hit
    sector = (0, True, 1, 1)
    reps, norms = _kernels_py.enumerate_reps(L, *sector)
    cx = np.full(L, -0.3 - 0.2j)
    states = np.arange(min(1 << L, 1 << 16), dtype=np.int64)
    rng = np.random.default_rng(0)
    z = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
    taus = np.geomspace(0.1, 100, 120)
    thetas = np.arange(1, 7) * np.pi / 20
    return {
        "enumerate_reps": lambda m: m.enumerate_reps(L, *sector),
        "representatives": lambda m: m.representatives(states, L, *sector),
        "offdiag_flips": lambda m: m.offdiag_flips(L, reps, norms, *sector, cx),
        "dsff_signal": lambda m: m.dsff_signal(z.real, z.imag, taus, thetas),
    }, reps.size


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, nargs="+", default=[14, 16, 18])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    backends = {"python": _kernels_py}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled extension not built; timing the fallback only")
    results = []
    print(f"{'L':>3} {'dim':>7} {'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for L in args.L:
        jobs, dim = workloads(L)
        for name, job in jobs.items():
            row = {"L": L, "dim": dim, "kernel": name}
            for b, mod in backends.items():
                row[b] = best_of(lambda: job(mod), args.repeat)
            speed = row["python"] / row["cython"] if "cython" in row else float("nan")
            row["speedup"] = speed
            results.append(row)
            print(f"{L:>3} {dim:>7} {name:<16}" + "".join(f"{row[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
