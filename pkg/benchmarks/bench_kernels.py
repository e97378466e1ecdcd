"""Compiled vs pure-Python geodesic shooting on the default paraboloid.

    python3 benchmarks/bench_kernels.py [--length 100] [--repeat 5]
"""
import argparse
import json
import math
import time

from geoform import _kernels_py

try:
    from geoform import _kernels
except ImportError:
    _kernels = None

ARGS = (76.3, 15.8, 0.0, 1.0, 0.001, 89.0, 89.0)
DOMAIN = (0.0, 178.0, 0.0, 178.0)


def time_shoot(mod, length, h, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = mod.paraboloid_shoot(*ARGS, length, h, *DOMAIN)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--length", type=float, default=100.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    report = {"length": args.length, "step": args.step}
    t_py, out_py = time_shoot(_kernels_py, args.length, args.step, args.repeat)
    report["python_s"] = t_py
    if _kernels is None:
        report["cython_s"] = None
    else:
        t_c, out_c = time_shoot(_kernels, args.length, args.step, args.repeat)
        report["cython_s"] = t_c
        report["speedup"] = t_py / t_c
        report["max_abs_diff"] = max(abs(a - b) for a, b in zip(out_py[:4], out_c[:4]))
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
