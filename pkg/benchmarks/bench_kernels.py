"""Compare the compiled and numpy discrete Frechet kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Times a single long-curve DP and a batched query-vs-curve workload (the
shape the oracle uses) on every available backend and checks that the
backends agree.
"""

import argparse
import json
import time

import numpy as np

from frechetds import kernels

CASES = [
    ("single 2000x2000 d=2", lambda rng: ("dfd", rng.normal(size=(2000, 2)), rng.normal(size=(2000, 2)))),
    ("single 5000x3 d=2", lambda rng: ("dfd", rng.normal(size=(5000, 2)), rng.normal(size=(3, 2)))),
    ("batch 2000 x (3 vs 2000) d=2", lambda rng: ("pairs", rng.normal(size=(2000, 3, 2)), rng.normal(size=(1, 2000, 2)))),
    ("batch 20000 x (3 vs 3) d=2", lambda rng: ("pairs", rng.normal(size=(20000, 3, 2)), rng.normal(size=(20000, 3, 2)))),
]


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    rows = []
    for name, make in CASES:
        kind, a, b = make(rng)
        results = {}
        for backend in kernels.available_backends():
            prev = kernels.use_backend(backend)
            fn = (lambda: kernels.dfd(a, b)) if kind == "dfd" else (lambda: kernels.dfd_pairs(a, b))
            results[backend] = best_time(fn, args.repeat)
            kernels.use_backend(prev)
        values = [np.asarray(v) for _, v in results.values()]
        agree = all(np.array_equal(values[0], v) for v in values[1:])
        row = {"case": name, "agree": agree} | {f"{k}_s": t for k, (t, _) in results.items()}
        if "cython" in results:
            row["speedup"] = results["python"][0] / results["cython"][0]
        rows.append(row)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        for r in rows:
            cells = "  ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items() if k != "case")
            print(f"{r['case']:<32} {cells}")


if __name__ == "__main__":
    main()
