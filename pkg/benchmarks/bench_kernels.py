"""Compare the compiled series kernels with the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times the raw kernels and the public functions that call them, with the
module-level kernel backend swapped in place.
"""
import argparse
import timeit

import numpy as np

from spacetime_probe import _kernels_py, numerics

try:
    from spacetime_probe import _kernels
except ImportError:
    _kernels = None

rng = np.random.default_rng(7)
Z_BESSEL = list(rng.uniform(0.1, 6, 200) + 1j * rng.uniform(-3, 3, 200))
Z_HYP = list(0.45 * np.exp(2j * np.pi * rng.random(200)))
Z_DS = [1 + ((0.01 - 1e-8j) ** 2 - r * r) / 4 for r in rng.uniform(0, 0.05, 200)]


def raw(k):
    for z in Z_BESSEL:
        k.bessel1_series(z)
    for z in Z_HYP:
        k.hyp2f1_series(3.75, -0.75, 2.0, z, 1e-17, 20000)


def public():
    for z in Z_BESSEL:
        numerics.hankel2_1(z)
    for z in Z_HYP + Z_DS:
        numerics.hyp2f1(3.75, -0.75, 2.0, z)


def bench(label, fn, repeat):
    t = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"{label:<28s} {t * 1e3:9.2f} ms")
    return t


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    if _kernels is None:
        print("compiled kernels not built; only the Python timings are shown")
    saved = numerics._k
    try:
        rows = [("python", _kernels_py)] + ([("compiled", _kernels)] if _kernels else [])
        times = {}
        for name, mod in rows:
            numerics._k = mod
            times[name] = (bench(f"raw kernels [{name}]", lambda: raw(mod), args.repeat),
                           bench(f"public functions [{name}]", public, args.repeat))
    finally:
        numerics._k = saved
    if _kernels:
        sp = [p / c for p, c in zip(times["python"], times["compiled"])]
        print(f"speed-up: raw {sp[0]:.1f}x, public {sp[1]:.1f}x")


if __name__ == "__main__":
    main()
