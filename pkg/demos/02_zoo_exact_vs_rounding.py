"""Rounding against the exact optimum on a bundled backbone.

Runs the Experiment A workflow on Ans for a few seeds and prints how far the
rounded placement lands from the optimum. Pass a topology name and a seed
count to try something else, e.g. ``python demos/02_zoo_exact_vs_rounding.py
Agis 3``. Exact search on graphs above 25 nodes is skipped unless you raise
``exact_max_nodes``; Sinet (47 nodes) takes several minutes per seed.
"""
import sys

from jsgpr.experiments import ExperimentConfig, run_experiment_a

name = sys.argv[1] if len(sys.argv) > 1 else "Ans"
n_seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 3

cfg = ExperimentConfig(topologies=[name], seeds=list(range(n_seeds)), d_max_values=[10.0], exact_max_nodes=50)
records = run_experiment_a(cfg)

print(f"{'seed':>4} {'method':<9} {'status':<9} {'cost':>11} {'gw':>3} {'vs exact':>9}")
for r in records:
    ratio = f"{r.normalized_cost:9.4f}" if r.normalized_cost is not None else " " * 9
    cost = f"{r.total_cost:11.3f}" if r.total_cost is not None else " " * 11
    print(f"{r.seed:>4} {r.method:<9} {r.status:<9} {cost} {r.gateways or 0:>3} {ratio}")

gaps = [r.gap for r in records if r.method == "rounding" and r.gap is not None]
if gaps:
    print(f"\nrounding gap: mean {100 * sum(gaps) / len(gaps):.2f}%, worst {100 * max(gaps):.2f}%")
