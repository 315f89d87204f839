"""Compare the compiled and numpy enumeration kernels.

    python benchmarks/bench_enumeration.py --sizes 16 18 20 --repeat 3

Each instance is a random integer quadratic objective over n +/-1 variables;
both kernels must return the same (value, index) before a timing is reported.
The bundled 13-ray inequality is timed as well.
"""
import argparse
import json
import time

import numpy as np

from ctxoptics import _kernels
from ctxoptics.contextuality_oracle import _csr, classical_bound_bruteforce, load_bundled_inequality


def random_instance(n, rng, density=0.3):
    vertex = rng.integers(-8, 9, n).astype(np.int64)
    edges = {(i, j): int(rng.integers(-8, 9)) for i in range(n) for j in range(i + 1, n)
             if rng.random() < density}
    return (vertex, *_csr(n, edges))


def best_time(fn, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 18, 20, 22])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="emit rows as JSON")
    args = ap.parse_args(argv)

    names = [k for k in ("cython", "python") if k in _kernels.KERNELS]
    rng = np.random.default_rng(args.seed)
    rows = []

    ds = load_bundled_inequality()
    row = {"case": "bundled-13"}
    for name in names:
        row[name], _ = best_time(lambda: classical_bound_bruteforce(ds.expression, kernel=name), args.repeat)
    rows.append(row)

    for n in args.sizes:
        inst = random_instance(n, rng)
        row, results = {"case": f"random-{n}"}, {}
        for name in names:
            fn = _kernels.KERNELS[name]
            row[name], results[name] = best_time(lambda: fn(*inst, n, 0), args.repeat)
        if len(set(results.values())) != 1:
            raise SystemExit(f"kernels disagree on n={n}: {results}")
        rows.append(row)

    for row in rows:
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'case':<12}" + "".join(f"{k:>12}" for k in names) + ("     speedup" if len(names) > 1 else ""))
    for row in rows:
        line = f"{row['case']:<12}" + "".join(f"{row[k]:>11.4f}s" for k in names)
        if "speedup" in row:
            line += f"{row['speedup']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
