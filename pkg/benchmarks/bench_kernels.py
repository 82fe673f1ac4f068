"""Compare the compiled and NumPy lift/unlift kernels.

    python3 benchmarks/bench_kernels.py [--repeat 50]
"""
import argparse
import importlib
import timeit

import numpy as np

from aloha import _hankel_py

CASES = [
    # (coils, n1, m1, p1, q1, stacked)
    (1, 64, 64, 9, 9, False),
    (1, 64, 64, 23, 23, False),
    (4, 64, 64, 7, 7, False),
    (4, 64, 64, 7, 7, True),
    (1, 64, 16, 17, 5, False),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    backends = {"python": _hankel_py}
    try:
        backends["cython"] = importlib.import_module("aloha._hankel_ext")
    except ImportError:
        print("compiled extension not built; timing the NumPy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'case':>28} {'op':>7} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for coils, n1, m1, p1, q1, stacked in CASES:
        grid = rng.standard_normal((coils, n1, m1)) + 1j * rng.standard_normal((coils, n1, m1))
        mat = _hankel_py.lift(grid, p1, q1, stacked)
        label = f"{coils}x{n1}x{m1} w{p1}x{q1}{' stk' if stacked else ''}"
        for op in ("lift", "unlift"):
            times = {}
            for name, mod in backends.items():
                if op == "lift":
                    fn = lambda: mod.lift(grid, p1, q1, stacked)
                else:
                    fn = lambda: mod.unlift(mat, coils, n1, m1, p1, q1, stacked)
                fn()
                times[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat)) * 1e3
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{label:>28} {op:>7} " + " ".join(f"{t:8.3f}ms" for t in times.values())
                  + f"   {speed:6.2f}x")


if __name__ == "__main__":
    main()
