"""
Metric benchmark: closed form vs quadrature vs Monte Carlo for mean SINR,
outage and mean capacity on the same scenarios. Reports values, discrepancies and latency.
Usage: from project root, python scripts/benchmark_metrics.py [--samples 100000] [--output results/benchmark_metrics.csv]
"""

import argparse
import sys
import time
from pathlib import Path

# Project root
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

import pandas as pd

from config import config
from core import analytic, montecarlo
from core.analytic import ScenarioParams
from core.montecarlo import SimConfig

SCENARIOS = [(4.0, 2.0), (2.0, 4.0), (2.0, 2.0), (4.0, 4.0)]
PSI = 1.0


def _timed(fn):
    t0 = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - t0


def run_benchmark(samples: int, workers: int, output_path: str):
    sim = SimConfig(samples=samples, seed=config.SEED, workers=workers)
    methods = [
        ("closed_form", lambda p: (analytic.mean_sinr(p), analytic.outage_probability(p, PSI), analytic.mean_capacity(p))),
        ("quadrature", lambda p: (analytic.mean_sinr_numeric(p), analytic.outage_numeric(p, PSI), analytic.mean_capacity_numeric(p))),
        ("monte_carlo", lambda p: _simulated(p, sim)),
    ]

    rows = []
    for p, q in SCENARIOS:
        params = ScenarioParams(p=p, q=q)
        row = {"scenario_id": params.scenario_id}
        for name, fn in methods:
            (mean_sinr, outage, capacity), elapsed = _timed(lambda: fn(params))
            row[f"{name}_mean_sinr"] = mean_sinr
            row[f"{name}_outage"] = outage
            row[f"{name}_mean_capacity"] = capacity
            row[f"{name}_latency_s"] = round(elapsed, 4)
        for name, _ in methods[1:]:
            row[f"{name}_max_abs_diff"] = max(
                abs(row[f"{name}_{m}"] - row[f"closed_form_{m}"]) for m in ("mean_sinr", "outage", "mean_capacity")
            )
        rows.append(row)

    df = pd.DataFrame(rows)
    out = Path(output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(out, index=False)
    print(f"Saved {out}")

    # Summary
    print("\n--- Summary ---")
    for name, _ in methods:
        latency = df[f"{name}_latency_s"].mean()
        diff = df[f"{name}_max_abs_diff"].max() if f"{name}_max_abs_diff" in df else 0.0
        print(f"  {name}: max_abs_diff={diff:.3g}, latency_avg_s={latency:.4f}")


def _simulated(params: ScenarioParams, sim: SimConfig):
    emp = montecarlo.simulate_sinr(params, sim)
    mean, _ = montecarlo.mean_estimate(emp)
    capacity, _ = montecarlo.mean_estimate(montecarlo.capacity_transform(emp))
    return mean, montecarlo.outage_estimate(emp, PSI), capacity


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=config.QUICK_SAMPLES)
    ap.add_argument("--workers", type=int, default=config.WORKERS)
    ap.add_argument("--output", default="results/benchmark_metrics.csv")
    args = ap.parse_args()
    run_benchmark(args.samples, args.workers, args.output)
