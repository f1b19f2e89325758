#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Runs one representative cell per scenario on both backends, reports wall
time, processed events per second, and the speedup, and cross-checks that
the two backends produced bit-identical traces while they were at it.
"""

from __future__ import annotations

import argparse
import time

from ponedge._kernel import available_backends
from ponedge.simulation import RunParams, run_simulation
from ponedge.workload import scenario_preset

CASES = [
    ("smart-city", "genio", 43_000.0),
    ("e-health", "baseline", 220_000.0),
    ("smart-building", "baseline", 440_000.0),
    ("aigc", "baseline", 700_000.0),
]


def time_run(params: RunParams, backend: str, repeats: int) -> tuple[float, int, str]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = run_simulation(params, backend=backend, collect_trace=True)
        best = min(best, time.perf_counter() - start)
    return best, result.processed_events, result.trace_hash


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--duration", type=float, default=600.0,
                        help="simulated seconds per cell (default 600)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="repeats per cell, best time wins (default 3)")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled kernel not built; reinstall the package to benchmark it")
        return 1

    header = (f"{'scenario':<15} {'topology':<9} {'mips':>9} {'events':>8} "
              f"{'python':>16} {'cython':>16} {'speedup':>8}  identical")
    print(header)
    print("-" * len(header))
    for scenario, topology, mips in CASES:
        params = RunParams(scenario=scenario_preset(scenario), topology=topology,
                           cpu_mips=mips, seed=1, duration_s=args.duration)
        py_time, events, py_hash = time_run(params, "python", args.repeats)
        cy_time, _, cy_hash = time_run(params, "cython", args.repeats)
        py_rate = f"{py_time:.3f}s {events / py_time / 1e3:.0f}k/s"
        cy_rate = f"{cy_time:.3f}s {events / cy_time / 1e3:.0f}k/s"
        print(f"{scenario:<15} {topology:<9} {mips:>9.0f} {events:>8} "
              f"{py_rate:>16} {cy_rate:>16} {py_time / cy_time:>7.1f}x  "
              f"{py_hash == cy_hash}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
