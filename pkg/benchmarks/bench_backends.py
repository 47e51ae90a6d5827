#!/usr/bin/env python3
"""Benchmark the compiled Monte-Carlo kernel against the numpy fallback.

Both backends consume identical pre-generated Gaussian draws, so the
comparison isolates the trial arithmetic.  Agreement is checked before
timing.  Usage:

    python3 benchmarks/bench_backends.py [--trials 200000] [--batch 4096]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from riscellfree.config import load_config, substream
from riscellfree.estimation import estimator_stats
from riscellfree.kernels import compiled_available, draw_batch, numpy_backend
from riscellfree.performance import kernel_inputs
from riscellfree.phases import equal_phase_design
from riscellfree.scenario import build_scenario

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "desk.json"


def run(backend_fn, inputs, batches):
    sums = None
    start = time.perf_counter()
    for draws in batches:
        out = backend_fn(inputs, *draws)
        if sums is None:
            sums = [np.array(o) for o in out]
        else:
            for acc, o in zip(sums, out):
                acc += o
    return time.perf_counter() - start, sums


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--batch", type=int, default=4096)
    parser.add_argument("--config", default=str(CONFIG))
    args = parser.parse_args()

    cfg = load_config(args.config)
    scenario = build_scenario(cfg, 0, system="ris")
    phases = equal_phase_design(np.pi / 4.0, cfg.N).realized
    stats = estimator_stats(scenario.ls, scenario.corr, phases, cfg)
    inputs = kernel_inputs(scenario.ls, scenario.corr, phases, cfg, stats)

    n_batches = max(1, args.trials // args.batch)
    print(f"scenario: M={cfg.M} K={cfg.K} N={cfg.N}, {n_batches} batches x {args.batch} trials")
    print("generating draws...")
    batches = [
        draw_batch(substream(cfg.master_seed, "bench", i), args.batch, inputs)
        for i in range(n_batches)
    ]
    total = n_batches * args.batch

    rows = [("numpy", numpy_backend.accumulate_uatf)]
    if compiled_available():
        from riscellfree.kernels import _uatf_cy

        rows.append(("compiled", _uatf_cy.accumulate_uatf))
    else:
        print("compiled kernel not built; benchmarking numpy only")

    results = {}
    for name, fn in rows:
        elapsed, sums = run(fn, inputs, batches)
        results[name] = (elapsed, sums)
        print(f"{name:>10}: {elapsed:8.3f} s  ({total / elapsed / 1e3:8.1f} k trials/s)")

    if len(results) == 2:
        ref = results["numpy"][1]
        got = results["compiled"][1]
        agree = all(np.allclose(a, b, rtol=1e-10) for a, b in zip(ref, got))
        speedup = results["numpy"][0] / results["compiled"][0]
        print(f"agreement (rtol 1e-10): {agree}")
        print(f"speedup compiled vs numpy: {speedup:.2f}x")
        if not agree:
            raise SystemExit(1)


if __name__ == "__main__":
    main()
