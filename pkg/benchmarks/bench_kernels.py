"""Time the numba and numpy GF(2) kernels on identical inputs.

    python3 benchmarks/bench_kernels.py --sizes 1 2 4 8 16 --count 2000

Both paths consume the same bit buffers, so their outputs are compared too.
"""

import argparse
import time

import numpy as np

from rblab import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_sampling(n, count, repeat, rng):
    bits = rng.integers(0, 2, size=(count, _kernels.bit_budget(n)), dtype=np.uint8)
    rows = {}
    for name, impl in (("numpy", _kernels.numpy_impl), ("numba", _kernels.numba_impl)):
        if impl is None:
            continue
        impl.sample_symplectic_batch(n, bits[:2])  # compile / warm up
        rows[name] = best_of(lambda: impl.sample_symplectic_batch(n, bits), repeat)
    return rows


def bench_signs(n, count, repeat, rng):
    c = rng.integers(0, 2, size=(2 * n, 2 * n), dtype=np.uint8)
    h = rng.integers(0, 2, size=2 * n, dtype=np.uint8)
    vecs = np.ascontiguousarray(rng.integers(0, 2, size=(2 * n, count), dtype=np.uint8))
    rows = {}
    for name, impl in (("numpy", _kernels.numpy_impl), ("numba", _kernels.numba_impl)):
        if impl is None:
            continue
        impl.conjugation_signs(c, h, vecs[:, :2].copy())
        rows[name] = best_of(lambda: impl.conjugation_signs(c, h, vecs), repeat)
    return rows


def report(label, n, rows):
    t_np = rows["numpy"][0]
    line = f"{label:<10} n={n:<3} numpy {t_np * 1e3:9.2f} ms"
    if "numba" in rows:
        t_nb, out_nb = rows["numba"]
        same = all(np.array_equal(a, b) for a, b in zip(rows["numpy"][1], out_nb)) \
            if isinstance(out_nb, tuple) else np.array_equal(rows["numpy"][1], out_nb)
        line += f"   numba {t_nb * 1e3:9.2f} ms   speedup {t_np / t_nb:6.1f}x   same={same}"
    print(line)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    ap.add_argument("--count", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"numba available: {_kernels.numba_impl is not None}; active path: "
          f"{'numba' if _kernels.active is _kernels.numba_impl else 'numpy'}")
    for n in args.sizes:
        report("sample", n, bench_sampling(n, args.count, args.repeat, rng))
    for n in args.sizes:
        report("signs", n, bench_signs(n, args.count * 10, args.repeat, rng))


if __name__ == "__main__":
    main()
