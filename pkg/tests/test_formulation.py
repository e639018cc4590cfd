import random
from dataclasses import replace
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from gridalloc.branch_bound import extract_allocation, solve_milp
from gridalloc.core import Allocation, ProblemInstance
from gridalloc.formulation import (Mode, Relation, Status, VarKind, build_milp, dump_model,
                                   lp_relaxation, point_from_allocation, point_objective,
                                   point_violations)
from gridalloc.oracle import random_instance
from gridalloc.simplex import solve_lp
from gridalloc.validator import evaluate


def test_grid_model_shape(grid):
    model = build_milp(grid)
    assert model.n_variables == 30
    assert len(model.constraints) == 29
    families = [c.label.split(":")[0] for c in model.constraints]
    assert families.count("deadline") == 3
    assert families.count("availability") == 5
    assert families.count("budget") == 3
    assert families.count("conservation") == 3
    assert families.count("linking") == 15
    kinds = [v.kind for v in model.variables]
    assert kinds[:15] == [VarKind.INTEGER] * 15
    assert kinds[15:] == [VarKind.BINARY] * 15


def test_one_by_one_model(trivial):
    model = build_milp(trivial)
    assert model.n_variables == 2
    assert len(model.constraints) == 5


@given(st.integers(0, 5000))
def test_size_formula(seed):
    inst = random_instance(seed)
    m, n = inst.n_sources, inst.n_processors
    model = build_milp(inst)
    assert model.n_variables == 2 * m * n
    # deadline, budget and conservation per source; availability per processor; linking per pair
    assert len(model.constraints) == 3 * m + n + m * n
    strict = build_milp(inst, strict_eq6=True)
    assert len(strict.constraints) == 3 * m + 2 * n + m * n


def test_continuous_mode_same_rows(grid):
    a = build_milp(grid, Mode.INTEGER)
    b = build_milp(grid, Mode.CONTINUOUS)
    assert a.constraints == b.constraints
    assert all(v.kind is VarKind.CONTINUOUS for v in b.variables[:15])
    assert all(v.kind is VarKind.BINARY for v in b.variables[15:])


def test_rows_match_the_data(grid):
    model = build_milp(grid)
    rows = {c.label: c for c in model.constraints}
    d1 = rows["deadline:S1"]
    assert d1.relation is Relation.LE and d1.rhs == 100
    assert d1.coefficients[:5] == (3, 4, 5, 4, 3)
    av = rows["availability:P2"]
    assert [av.coefficients[model.alpha_index(i, 1)] for i in range(3)] == [4, 4, 4]
    assert av.rhs == 60
    link = rows["linking:S3:P4"]
    assert link.coefficients[model.alpha_index(2, 3)] == 1
    assert link.coefficients[model.x_index(2, 3)] == -27
    assert model.variables[model.alpha_index(2, 3)].upper == 27
    assert model.objective[:5] == (4, 3, 2, 3, 5)
    assert all(v == 0 for v in model.objective[15:])


def test_lp_relaxation(grid):
    model = build_milp(grid)
    relaxed = lp_relaxation(model)
    assert all(v.kind is VarKind.CONTINUOUS for v in relaxed.variables)
    assert [(v.lower, v.upper) for v in relaxed.variables] == [(v.lower, v.upper) for v in model.variables]
    assert relaxed.constraints == model.constraints
    assert lp_relaxation(relaxed) is relaxed


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_relaxation_never_above_integer_optimum(seed):
    inst = random_instance(seed)
    model = build_milp(inst)
    lp = solve_lp(lp_relaxation(model))
    sol, _ = solve_milp(model)
    if sol.status is Status.OPTIMAL:
        assert lp.status is Status.OPTIMAL
        assert lp.objective_value <= sol.objective_value + 1e-9


def _random_allocation(inst, rng):
    rows = []
    for s in inst.sources:
        if rng.random() < 0.5:
            # split the workload exactly across processors
            cuts = sorted(rng.randint(0, int(s.workload)) for _ in range(inst.n_processors - 1))
            parts = [b - a for a, b in zip([0] + cuts, cuts + [int(s.workload)])]
        else:
            parts = [rng.randint(0, int(s.workload)) for _ in range(inst.n_processors)]
        rows.append(tuple(Fraction(v) for v in parts))
    return Allocation(tuple(rows))


@given(st.integers(0, 10_000), st.integers(0, 2**32 - 1))
def test_validator_and_model_agree(seed, alloc_seed):
    inst = random_instance(seed)
    alloc = _random_allocation(inst, random.Random(alloc_seed))
    model = build_milp(inst)
    point = point_from_allocation(model, alloc)
    report = evaluate(inst, alloc)
    assert report.feasible == (point_violations(model, point) == [])
    assert point_objective(model, point) == report.total_cost


@given(st.integers(0, 10_000), st.integers(0, 2**32 - 1))
def test_validator_and_strict_model_agree(seed, alloc_seed):
    inst = random_instance(seed)
    alloc = _random_allocation(inst, random.Random(alloc_seed))
    model = build_milp(inst, strict_eq6=True)
    point = point_from_allocation(model, alloc)
    report = evaluate(inst, alloc, strict_eq6=True)
    assert report.feasible == (point_violations(model, point) == [])


def _scaled(inst: ProblemInstance, k: Fraction) -> ProblemInstance:
    procs = tuple(replace(p, cost_per_unit=p.cost_per_unit * k) for p in inst.processors)
    srcs = tuple(replace(s, budget=s.budget * k) for s in inst.sources)
    return ProblemInstance(procs, srcs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([Fraction(2), Fraction(3), Fraction(1, 2), Fraction(7, 4)]))
def test_cost_scaling_argmin_invariance(seed, k):
    # budgets scale with costs so the feasible set is unchanged
    inst = random_instance(seed)
    scaled = _scaled(inst, k)
    sol, _ = solve_milp(build_milp(inst))
    sol_k, _ = solve_milp(build_milp(scaled))
    assert sol.status == sol_k.status
    if sol.status is not Status.OPTIMAL:
        return
    assert abs(sol_k.objective_value - float(k) * sol.objective_value) < 1e-9
    a = extract_allocation(sol, inst)
    a_k = extract_allocation(sol_k, scaled)
    # each argmin stays optimal under the other cost vector
    assert evaluate(scaled, a).total_cost == k * evaluate(inst, a).total_cost
    assert evaluate(inst, a_k).total_cost == evaluate(inst, a).total_cost


def test_dump_model(trivial):
    text = dump_model(build_milp(trivial))
    lines = text.splitlines()
    assert lines[0] == "minimize: 2 a[S1,P1]"
    assert "deadline:S1: a[S1,P1] <= 10" in lines
    assert "linking:S1:P1: a[S1,P1] - 10 x[S1,P1] <= 0" in lines
    assert "bounds:x[S1,P1]: 0 <= x[S1,P1] <= 1 (binary)" in lines
