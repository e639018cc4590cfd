from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from gridalloc.formulation import Status, build_milp, lp_relaxation
from gridalloc.simplex import TOL, check_certificate, solve_lp

from lp_oracle import enumerate_vertices
from models import lp


def test_single_bounded_variable():
    model = lp([1], [], [(5, 10)])
    sol = solve_lp(model)
    assert sol.status is Status.OPTIMAL
    assert sol.values == (5.0,)
    assert sol.objective_value == 5.0


def test_two_variable_equality():
    model = lp([3, 2], [([1, 1], "=", 4)], [(0, 3), (0, 3)])
    sol = solve_lp(model)
    best = enumerate_vertices(model)
    assert best[0] == pytest.approx(9.0)
    assert sol.status is Status.OPTIMAL
    assert sol.values == pytest.approx((1.0, 3.0), abs=1e-12)
    assert sol.objective_value == pytest.approx(9.0, abs=1e-12)
    assert check_certificate(model, sol).passed


def test_contradictory_rows_are_infeasible():
    model = lp([1], [([1], ">=", 5), ([1], "<=", 3)], [(0, None)])
    sol = solve_lp(model)
    assert sol.status is Status.INFEASIBLE
    assert sol.phase1_objective > 0


def test_crossed_bounds_are_infeasible():
    model = lp([1], [], [(4, 3)])
    assert solve_lp(model).status is Status.INFEASIBLE


def test_unbounded():
    model = lp([-1, 0], [([1, -1], "<=", 2)], [(0, None), (0, None)])
    sol = solve_lp(model)
    assert sol.status is Status.UNBOUNDED
    ray = np.array(sol.certificate.ray)
    assert ray @ np.array(model.c) < 0
    assert np.all(ray >= -1e-12)


def test_rejects_integer_models(grid):
    with pytest.raises(ValueError):
        solve_lp(build_milp(grid))


def test_iteration_limit_is_reported_not_guessed(grid):
    sol = solve_lp(lp_relaxation(build_milp(grid)), max_iterations=3)
    assert sol.status is Status.NUMERICAL_FAILURE
    assert sol.values == ()


def test_beale_cycling_example_terminates():
    # cycles under textbook Dantzig pricing without an anti-cycling rule
    model = lp(
        [-0.75, 150, -0.02, 6],
        [([0.25, -60, -0.04, 9], "<=", 0),
         ([0.5, -90, -0.02, 3], "<=", 0),
         ([0, 0, 1, 0], "<=", 1)],
        [(0, None)] * 4,
    )
    sol = solve_lp(model)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == pytest.approx(-0.05, abs=1e-12)
    assert check_certificate(model, sol).passed


def test_highly_degenerate_assignment():
    # 3x3 assignment polytope: every vertex is degenerate
    cost = [4, 1, 3, 2, 0, 5, 3, 2, 2]
    rows = []
    for i in range(3):
        rows.append(([1 if k // 3 == i else 0 for k in range(9)], "=", 1))
        rows.append(([1 if k % 3 == i else 0 for k in range(9)], "=", 1))
    model = lp(cost, rows, [(0, None)] * 9)
    sol = solve_lp(model)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == pytest.approx(5.0)  # brute force over the 6 permutations
    assert check_certificate(model, sol).passed


def test_grid_relaxation_certificate(grid):
    model = lp_relaxation(build_milp(grid))
    sol = solve_lp(model)
    assert sol.status is Status.OPTIMAL
    assert sol.phase1_objective == pytest.approx(0.0, abs=TOL)
    # 397 < 398: the relaxation may put 27.5 units on P4 (110 min / 4 min per unit);
    # frozen from scipy's HiGHS on the same matrices
    assert sol.objective_value == pytest.approx(397.0, abs=1e-6)
    assert check_certificate(model, sol).passed


def test_certificate_catches_row_violation(grid):
    model = lp_relaxation(build_milp(grid))
    sol = solve_lp(model)
    # deadline:S1 is tight at the optimum; push one of its variables up by 10 tol
    row = next(k for k, c in enumerate(model.constraints) if c.label == "deadline:S1")
    lhs = model.A[row] @ np.array(sol.values)
    assert lhs == pytest.approx(model.b[row], abs=1e-9)
    k = next(k for k in range(15) if model.A[row, k] > 0 and sol.values[k] < model.upper[k] - 1)
    values = list(sol.values)
    values[k] += 10 * TOL
    bad = replace(sol, values=tuple(values), objective_value=float(model.c @ np.array(values)))
    check = check_certificate(model, bad)
    assert not check.passed
    assert ("RowViolation", "deadline:S1") in check.failures


def test_certificate_catches_objective_mismatch(grid):
    model = lp_relaxation(build_milp(grid))
    sol = solve_lp(model)
    check = check_certificate(model, replace(sol, objective_value=sol.objective_value + 1.0))
    assert not check.passed
    assert check.reason == "ObjectiveMismatch"


def test_certificate_catches_suboptimal_point():
    model = lp([3, 2], [([1, 1], "=", 4)], [(0, 3), (0, 3)])
    sol = solve_lp(model)
    # feasible but not optimal: x=3, y=1 with the same duals
    bad = replace(sol, values=(3.0, 1.0), objective_value=11.0)
    check = check_certificate(model, bad)
    assert not check.passed
    assert {r for r, _ in check.failures} & {"ReducedCost", "ComplementarySlackness"}


@st.composite
def small_lps(draw):
    n = draw(st.integers(2, 3))
    n_rows = draw(st.integers(1, 4))
    coef = st.integers(-5, 5)
    objective = [draw(coef) for _ in range(n)]
    rows = []
    for _ in range(n_rows):
        rows.append(([draw(coef) for _ in range(n)], draw(st.sampled_from(["<=", ">=", "="])),
                     draw(st.integers(-10, 10))))
    bounds = []
    for _ in range(n):
        lo = draw(st.integers(-3, 3))
        bounds.append((lo, lo + draw(st.integers(0, 8))))
    return lp(objective, rows, bounds)


@settings(max_examples=300, deadline=None)
@given(small_lps())
def test_matches_vertex_enumeration(model):
    sol = solve_lp(model)
    best = enumerate_vertices(model)
    if best is None:
        assert sol.status is Status.INFEASIBLE
        return
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == pytest.approx(best[0], abs=1e-6)
    assert check_certificate(model, sol).passed


@settings(max_examples=200, deadline=None)
@given(small_lps())
def test_phase_one_sign(model):
    sol = solve_lp(model)
    assume(sol.phase1_objective is not None and np.isfinite(sol.phase1_objective))
    assert sol.phase1_objective >= 0
    if sol.status is Status.OPTIMAL:
        assert sol.phase1_objective <= TOL * 10
    else:
        assert sol.phase1_objective > 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_deterministic(seed):
    from gridalloc.oracle import random_instance
    model = lp_relaxation(build_milp(random_instance(seed)))
    a, b = solve_lp(model), solve_lp(model)
    assert a == b
