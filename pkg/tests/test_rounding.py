import json

import numpy as np
import pytest

from jsgpr.errors import Infeasible
from jsgpr.instance import SamplingParams, make_instance
from jsgpr.metrics import check_feasibility
from jsgpr.milp import solve_exact
from jsgpr.model import build_jsgpr_f2, build_jsgpr_lb
from jsgpr.rounding import _fractional, round_lp, solve_mcf

from oracles import random_instance


@pytest.fixture(scope="module")
def small_cases():
    out = []
    for seed in range(8):
        inst = random_instance(500 + seed, 7)
        out.append((inst, build_jsgpr_f2(inst, compact=True)))
    return out


def test_trace_is_monotone_and_bounded(small_cases):
    for inst, built in small_cases:
        res = round_lp(built)
        tr = res.trace
        assert tr.iterations <= len(inst.candidate_set)
        objs = tr.lp_objectives
        # raising lower bounds can only make the relaxation dearer
        assert all(b >= a - 1e-9 for a, b in zip(objs, objs[1:]))
        if res.accepted:
            assert objs[-1] <= res.solution.objective + 1e-9
            assert set(res.solution.placement.values()) <= {0, 1}
            assert check_feasibility(res.solution, inst).passed


def test_sandwich_with_exact(small_cases):
    for inst, built in small_cases:
        res = round_lp(built)
        ex = solve_exact(built)
        if not res.accepted:
            continue
        lp = res.trace.relaxation_objective
        assert lp <= ex.outcome.objective + 1e-7
        assert ex.outcome.objective <= res.solution.objective + 1e-7


def test_every_fix_targets_the_largest_fractional(small_cases):
    inst, built = small_cases[0]
    tr = round_lp(built).trace
    for step in tr.steps:
        if step.chosen is not None:
            assert 0 < step.chosen_value < 1
            assert step.fractional >= 1


def test_fractional_helper_and_tie_break():
    y = np.array([0.0, 0.5, 1.0, 0.5, 1e-9])
    frac = _fractional(y, 1e-6)
    assert frac.tolist() == [1, 3]
    # equal values resolve to the lowest index
    assert int(frac[np.argmax(y[frac])]) == 1


def test_warm_start_reaches_the_same_placement(small_cases):
    for inst, built in small_cases[:3]:
        a, b = round_lp(built), round_lp(built, warm_start=True)
        assert a.status == b.status
        if a.accepted:
            assert a.solution.objective == pytest.approx(b.solution.objective, rel=1e-7)


def test_rejected_returns_an_empty_solution(square):
    inst = make_instance(square, SamplingParams(seed=1, q_j_default=10.0))
    res = round_lp(build_jsgpr_f2(inst))
    assert res.status == "Rejected"
    assert not res.accepted
    assert res.solution.flows == {} and not any(res.solution.placement.values())
    assert res.trace.reason


def test_tight_delay_rejects_when_no_gateway_is_reachable(square):
    # demands at a and b, candidates at c and d, one hop costs far more than d_max
    inst = make_instance(square, d_max=1e-4, I=["a", "b"], J=["c", "d"])
    assert round_lp(build_jsgpr_f2(inst)).status == "Rejected"


def test_solve_mcf(square_instance):
    built = build_jsgpr_f2(square_instance)
    sol = solve_mcf(built, ["a", "b", "c", "d"])
    assert check_feasibility(sol, square_instance).passed
    with pytest.raises(KeyError):
        solve_mcf(built, ["q"])
    with pytest.raises(Infeasible):
        solve_mcf(built, [])


def test_trace_serializes(square_instance):
    tr = round_lp(build_jsgpr_f2(square_instance)).trace
    doc = json.loads(tr.to_json())
    assert doc["status"] == "Accepted"
    assert len(doc["steps"]) == len(tr.steps)


def test_rounding_on_lb_model(square_instance):
    built = build_jsgpr_lb(square_instance, compact=True)
    res = round_lp(built)
    assert res.accepted
    assert res.solution.l_max is not None
    assert check_feasibility(res.solution, square_instance, l_max=res.solution.l_max).passed
