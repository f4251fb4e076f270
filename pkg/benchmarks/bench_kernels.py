"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --owners 1000000 --repeat 5

Both backends produce identical counts for the same keys; the script checks
that before timing.
"""
import argparse
import timeit

import numpy as np

from sampling_privacy._kernels import _py
from sampling_privacy.mechanisms import SPMultiSpec

try:
    from sampling_privacy._kernels import _fast
except ImportError:
    _fast = None


def cases(n):
    rng = np.random.default_rng(0)
    binary = rng.integers(0, 2, n)
    multi = rng.integers(0, 5, n)
    cdf = np.array(SPMultiSpec.uniform(4, 0.45).cdf)
    return {
        "rr": lambda mod: mod.rr_counts(binary, 0.8, 0.2, 1, 4, 2),
        "toy": lambda mod: mod.toy_counts(binary, 0.5, 0.6, 0.5, 1, 4, 2),
        "sp-multi V=4": lambda mod: mod.sp_counts(cdf, multi, 1, 4, 2),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--owners", type=int, default=10**6)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = [("numpy", _py)] + ([("compiled", _fast)] if _fast is not None else [])
    if _fast is None:
        print("compiled kernel not built; timing the numpy fallback only")
    print(f"{'kernel':<14} {'backend':<9} {'ms / call':>10} {'Mowners/s':>10}")
    for name, fn in cases(args.owners).items():
        if _fast is not None:
            assert np.array_equal(fn(_py), fn(_fast)), name
        base = None
        for label, mod in backends:
            t = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
            base = base or t
            speedup = f"  x{base / t:.1f}" if label == "compiled" else ""
            print(f"{name:<14} {label:<9} {t * 1e3:>10.1f} {args.owners / t / 1e6:>10.1f}{speedup}")


if __name__ == "__main__":
    main()
