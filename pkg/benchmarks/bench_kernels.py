"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from sphere_interp import _backend
from sphere_interp.series import _residues


def cases():
    c, d0, al, e = _residues(0, 96)
    nodes = np.exp(2j * np.pi * np.arange(256) / 256) * 0.9 + 0.05j
    d = d0 + 2 * c
    r2 = np.linspace(0.0, 4.0, 41)
    return {
        "row_data(c=2001)": lambda m: m.row_data(1, 2001),
        "twisted_sums(c<=2000, 41 r, n<=25)": lambda m: m.twisted_sums(0, 2, 2000, r2, 25),
        "periodized_sum(c<=96, 256 nodes)": lambda m: m.periodized_sum(c, d0, al, e, 8, 0.5, nodes, 6),
        "box_sum(c<=96)": lambda m: m.box_sum(c, d, al, e, 8, 0.5 + 0j, 0.1 + 1.2j),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    mods = {"python": _backend.get("python")}
    try:
        mods["cython"] = _backend.get("cython")
    except ImportError:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':40s} " + " ".join(f"{k:>11s}" for k in mods) + "    speedup")
    for name, fn in cases().items():
        times = {}
        for key, mod in mods.items():
            fn(mod)
            times[key] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        cols = " ".join(f"{times[k] * 1e3:9.2f}ms" for k in mods)
        speed = f"{times['python'] / times['cython']:9.1f}x" if "cython" in times else ""
        print(f"{name:40s} {cols} {speed}")


if __name__ == "__main__":
    main()
