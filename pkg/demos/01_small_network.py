"""Place gateways on a six-city toy network and compare the three solvers.

The network is small enough that every placement can be enumerated, so the
output shows the relaxation bound, the rounded answer and the proven optimum
side by side with the brute-force reference.

    python demos/01_small_network.py
"""
from jsgpr import (
    SamplingParams,
    brute_force_placement,
    build_jsgpr_f2,
    make_instance,
    metrics_report,
    round_lp,
    solve_exact,
    solve_lp,
    validate,
)
from jsgpr.topology import make_topology

# rough coordinates of six European cities, linked in a ring with two chords
cities = {
    "AMS": (52.37, 4.90),
    "BRU": (50.85, 4.35),
    "PAR": (48.86, 2.35),
    "LYO": (45.76, 4.84),
    "MIL": (45.46, 9.19),
    "FRA": (50.11, 8.68),
}
ring = ["AMS", "BRU", "PAR", "LYO", "MIL", "FRA"]
edges = [(a, b) for a, b in zip(ring, ring[1:] + ring[:1])] + [("BRU", "FRA"), ("PAR", "FRA")]
topo = make_topology(cities, edges, capacity_mbps=100.0, name="toy")
report = validate(topo)
print(f"{topo.name}: {len(topo.nodes)} nodes, {len(topo.links)} links, connected={report.connected}")

inst = make_instance(topo, SamplingParams(seed=7), d_max=5.0)
print(f"total demand {inst.total_demand:.1f} Mbps, gateway capacity {inst.capacity_of['AMS']:.0f} Mbps each")

built = build_jsgpr_f2(inst, compact=True)
relax = solve_lp(built.model)
rounded = round_lp(built)
exact = solve_exact(built, incumbent=rounded.solution)
brute = brute_force_placement(inst)

print(f"LP relaxation   {relax.objective:10.3f}")
print(f"rounding        {rounded.solution.objective:10.3f}  gateways {rounded.solution.open_gateways}")
print(f"branch & bound  {exact.solution.objective:10.3f}  gateways {exact.solution.open_gateways}  ({exact.outcome.nodes} nodes)")
print(f"enumeration     {brute.objective:10.3f}  gateways {list(brute.subset)}  ({brute.evaluated} subsets routed)")

report = metrics_report(exact.solution, inst)
print("\nper-gateway load (Mbps):", {j: round(v, 1) for j, v in report.load_mbps.items() if v > 1e-9})
print("per-demand average delay (ms):", {i: round(v, 3) for i, v in report.avg_delay_ms.items()})
print("largest constraint residual:", max(report.residuals.values()))
