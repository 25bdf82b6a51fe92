"""Per-sample cost of the compiled and pure-Python kernels on the builtin scenes.

Usage: python benchmarks/compare_backends.py [--samples N] [--scenes wedge boxes ...]
"""
import argparse

from edgetrace import bench, scenes
from edgetrace.config import SimulationConfig
from edgetrace.geometry import Scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=12000)
    ap.add_argument("--scenes", nargs="+", default=["wedge", "double-wedge", "boxes"])
    args = ap.parse_args()
    print(f"{'scene':<14}{'compiled us':>12}{'pure us':>12}{'speedup':>10}{'max rel diff':>14}")
    for name in args.scenes:
        b = scenes.get(name)
        sc = Scene(b.mesh, b.bc_of_material())
        cfg = SimulationConfig(samples=args.samples)
        timings, speedup, diff = bench.compare_backends(sc, b.source, b.listener, cfg)
        comp = timings.get("compiled")
        print(f"{name:<14}{comp.per_sample_us if comp else float('nan'):>12.2f}"
              f"{timings['pure'].per_sample_us:>12.1f}{speedup or float('nan'):>10.0f}"
              f"{diff if diff is not None else float('nan'):>14.2g}")


if __name__ == "__main__":
    main()
