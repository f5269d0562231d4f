"""Compare the pure-Python and compiled kernel backends.

Times the two hot paths (dense RK4 integration and one full seeking
window: shooting solve plus plant simulation) under each backend and
prints the speedup. Run with ``python benchmarks/bench_kernels.py``.
"""

import math
import time

from noesc import backend
from noesc.esc import plan_transition, simulate_transition
from noesc.numerics import IntegratorConfig, integrate_ivp
from noesc.plant import example_plant
from noesc.trajectory import SaturationMap


def bench_rk4():
    integrate_ivp(
        lambda t, v: [math.sin(t) - v[0], v[0] - 0.5 * v[1]],
        (0.0, 10.0),
        [1.0, -0.3],
        IntegratorConfig(step=1e-4, store_every=100),
    )


def bench_window():
    plant = example_plant(1.0)
    sat = SaturationMap.from_output_bounds(-1.5, 1.5, 0.5, 4.0)
    plan = plan_transition(plant, sat, [0.8, 3.0], [1.5, 2.056], 0.0, 1.0, [0.01], 1.0)
    simulate_transition(plant, sat, plan, IntegratorConfig(step=1e-3, store_every=10))


def timeit(fn, repeat=5):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    cases = [("dense RK4 (100k steps)", bench_rk4), ("one seeking window", bench_window)]
    names = ["pure"] + (["compiled"] if backend.compiled_available() else [])
    print(f"{'case':<28}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for label, fn in cases:
        times = {}
        for name in names:
            backend.use(name)
            times[name] = timeit(fn)
        backend.use("auto")
        row = f"{label:<28}" + "".join(f"{times[n] * 1e3:>10.1f}ms" for n in names)
        if "compiled" in times:
            row += f"{times['pure'] / times['compiled']:>9.1f}x"
        print(row)
    if not backend.compiled_available():
        print("compiled kernels not built; showing the pure backend only")


if __name__ == "__main__":
    main()
