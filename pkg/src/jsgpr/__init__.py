"""Joint satellite gateway placement and routing.

Typical use::

    from jsgpr import bundled_topologies, load_graphml, make_instance
    from jsgpr import build_jsgpr_f2, round_lp, solve_exact

    topo = load_graphml(bundled_topologies()["Ans"])
    inst = make_instance(topo)               # seed 0, d_max = 10 ms
    built = build_jsgpr_f2(inst, compact=True)
    rounded = round_lp(built)
    exact = solve_exact(built, incumbent=rounded.solution)
"""
from .errors import JsgprError
from .instance import ProblemInstance, SamplingParams, make_instance, sample_costs, sample_demands
from .lp import LinearModel, LpOutcome, LpSession, LpStatus, read_mps, solve_lp, write_mps
from .metrics import (
    MetricsReport,
    ResidualReport,
    Solution,
    avg_delay,
    check_feasibility,
    gateway_loads,
    metrics_report,
    total_cost,
)
from .milp import MilpOptions, MilpOutcome, MilpStatus, brute_force_placement, solve_exact, solve_milp
from .model import (
    BuiltModel,
    VarMap,
    build_jsgpr_f1,
    build_jsgpr_f2,
    build_jsgpr_lb,
    census,
    extract_solution,
    fix_placement,
    x_from_flows,
)
from .rounding import RoundingResult, RoundingTrace, round_lp, solve_mcf
from .topology import (
    GeoNode,
    PhysLink,
    Topology,
    bundled_topologies,
    haversine_km,
    link_delay_ms,
    load_graphml,
    parse_graphml,
    validate,
)

__version__ = "0.1.0"
