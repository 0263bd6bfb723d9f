"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``.  Each case checks that both
backends agree before timing them.
"""

import argparse
import timeit

import numpy as np

from schattenlab.kernels import available_backends

CASES = {
    "lattice_norm_counts(n=2, jmax=40000)": lambda m: m.lattice_norm_counts(2, 40000),
    "lattice_norm_counts(n=3, jmax=4000)": lambda m: m.lattice_norm_counts(3, 4000),
    "legendre_table(m=0, lmax=400, 3201 pts)": lambda m: m.legendre_table(
        0, 400, np.cos(np.linspace(0, np.pi, 3201))),
    "legendre_table(m=50, lmax=400, 3201 pts)": lambda m: m.legendre_table(
        50, 400, np.cos(np.linspace(0, np.pi, 3201))),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    for name, fn in CASES.items():
        results = {b: fn(mod) for b, mod in backends.items()}
        ref = results["python"]
        for b, res in results.items():
            if not np.allclose(res, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max()):
                raise SystemExit(f"{name}: backend {b} disagrees with python")
        times = {b: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for b, mod in backends.items()}
        line = "  ".join(f"{b} {t * 1e3:9.2f} ms" for b, t in times.items())
        if "compiled" in times:
            line += f"  speedup {times['python'] / times['compiled']:6.1f}x"
        print(f"{name:45s} {line}")


if __name__ == "__main__":
    main()
