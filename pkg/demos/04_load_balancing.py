"""Spreading load across gateways with the l_max term.

Solves one instance twice: plain cost minimisation, then with a penalty on
the largest gateway load. The second answer pays a little more deployment
or routing cost so that the busiest uplink carries less.

    python demos/04_load_balancing.py [alpha]
"""
import sys

from jsgpr import build_jsgpr_f2, build_jsgpr_lb, gateway_loads, make_instance, round_lp, solve_exact, total_cost
from jsgpr import SamplingParams, bundled_topologies, load_graphml

alpha = float(sys.argv[1]) if len(sys.argv) > 1 else 200.0
topo = load_graphml(bundled_topologies()["Ans"])
inst = make_instance(topo, SamplingParams(seed=0), d_max=10.0, alpha=alpha)

plain_model = build_jsgpr_f2(inst, compact=True)
plain = solve_exact(plain_model, incumbent=round_lp(plain_model).solution).solution
lb_model = build_jsgpr_lb(inst, alpha, compact=True)
balanced = solve_exact(lb_model, incumbent=round_lp(lb_model).solution).solution

for label, sol in (("cost only", plain), (f"alpha={alpha:g}", balanced)):
    loads = {j: v for j, v in gateway_loads(sol, inst).items() if v > 1e-9}
    print(f"{label:>12}: cost {total_cost(sol, inst):10.3f}, {len(loads)} gateways, max load {max(loads.values()):6.1f} Mbps")
    print(" " * 14 + ", ".join(f"{j} {v:.0f}" for j, v in sorted(loads.items())))
