"""Wall time of the numba and numpy time-stepping backends on the presets.

    python3 benchmarks/bench_kernels.py [--repeat N] [names ...]
"""
import argparse
import time

import numpy as np

from gpecho import _kernels
from gpecho.scenarios import PRESETS, get_scenario

DEFAULT = ("fig4-none", "fig4-halftime", "fig2-pi", "fig1-500")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    p = argparse.ArgumentParser()
    p.add_argument("names", nargs="*", metavar="name", help=f"presets (default: {' '.join(DEFAULT)})")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    names = args.names or DEFAULT
    unknown = sorted(set(names) - set(PRESETS))
    if unknown:
        p.error(f"unknown presets {unknown}")

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if "numba" in backends:
        # compile (or load from cache) outside the timed region
        get_scenario("fig4-none").simulate(backend="numba")

    print(f"{'scenario':24s} {'nodes':>6s} {'steps':>7s} " + " ".join(f"{b:>9s}" for b in backends)
          + "   speedup  max|diff|")
    for name in names:
        sc = get_scenario(name)
        res = {}
        for b in backends:
            res[b] = best_of(lambda: sc.simulate(backend=b), args.repeat)
        nodes = sum(t.n_x for t in sc.targets)
        row = f"{name:24s} {nodes:6d} {sc.grid.n_steps:7d} " + " ".join(
            f"{res[b][0]:8.3f}s" for b in backends)
        if len(backends) == 2:
            diff = np.max(np.abs(res["numba"][1].output.omega - res["numpy"][1].output.omega))
            row += f"   {res['numpy'][0] / res['numba'][0]:6.1f}x  {diff:.1e}"
        print(row)


if __name__ == "__main__":
    main()
