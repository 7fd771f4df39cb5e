"""How the delay bound trades against cost.

For each seed the same instance is solved under d_max = 2, 5, 10 ms and with
no bound at all. A tight bound forces gateways close to every demand, so
more of them open and the bill goes up.

    python demos/03_delay_sweep.py [topology] [seeds]
"""
import math
import sys

from jsgpr.experiments import ExperimentConfig, monotonicity, sweep_dmax

name = sys.argv[1] if len(sys.argv) > 1 else "Ans"
n_seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 2

cfg = ExperimentConfig(
    topologies=[name],
    seeds=list(range(n_seeds)),
    d_max_values=[2.0, 5.0, 10.0, math.inf],
    methods=("exact",),
)
records = sweep_dmax(cfg)
for r in records:
    cost = f"{r.total_cost:11.3f}" if r.total_cost is not None else "   rejected"
    print(f"seed {r.seed}  d_max {r.d_max:>4}  {cost}  gateways {r.gateways or 0}")

for key, ok in monotonicity(records).items():
    print("non-increasing in d_max" if ok else "NOT monotone", key)
