"""Depth-first branch-and-bound over the allocation MILP, plus a greedy incumbent."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Allocation, ProblemInstance
from .formulation import (MilpModel, MilpSolution, Status, VarKind, lp_relaxation,
                          point_from_allocation, point_objective, point_violations)
from .simplex import TOL, solve_lp
from .validator import evaluate

INTEGRALITY_TOL = 1e-6
NODE_LIMIT = 50_000


class AllocationConsistencyError(RuntimeError):
    """A solver result that cannot be turned into a valid allocation."""


@dataclass
class SearchStats:
    nodes_explored: int = 0
    incumbent_updates: int = 0
    best_bound: float = -math.inf
    proven_optimal: bool = False


def _fractionality(v: float) -> float:
    return abs(v - round(v))


def _integral_objective(model: MilpModel) -> bool:
    """True when every feasible integral point has an integer objective."""
    for v, c in zip(model.variables, model.objective):
        if c == 0:
            continue
        if v.kind is VarKind.CONTINUOUS or c.denominator != 1:
            return False
    return True


def _alloc_from_alpha(model: MilpModel, alpha: list[Fraction]) -> Allocation:
    n = model.n_processors
    return Allocation(tuple(tuple(alpha[i * n:(i + 1) * n]) for i in range(model.n_sources)))


def _candidate_point(model: MilpModel, values: np.ndarray):
    """Exact feasible point from an LP solution whose integer variables are integral.

    Indicators are first normalized to ``x = [a > 0]``; if that breaks a row
    the rounded LP indicators are tried. Returns None when neither works.
    """
    mn = model.n_sources * model.n_processors
    rounded = []
    for v, val in zip(model.variables, values):
        rounded.append(Fraction(round(val)) if v.kind is not VarKind.CONTINUOUS
                       else Fraction(float(val)).limit_denominator(10**6))
    normalized = point_from_allocation(model, _alloc_from_alpha(model, rounded[:mn]))
    normalized = tuple(normalized[:mn]) + tuple(normalized[mn:2 * mn]) + tuple(rounded[2 * mn:])
    slack = Fraction(0) if all(v.kind is not VarKind.CONTINUOUS for v in model.variables) \
        else Fraction(1, 10**7)
    for point in (normalized, tuple(rounded)):
        if not point_violations(model, point, slack):
            return point
    return None


def _fill_bound(model: MilpModel, lower: np.ndarray, upper: np.ndarray) -> float:
    """Cheapest placement of all workload into whole-unit processor capacities.

    Ignores deadlines and budgets but respects the node's allocation bounds,
    so it stays valid below the node. Infinite when the node cannot place
    every unit. Returns -inf for models without capacity metadata.
    """
    m, n = model.n_sources, model.n_processors
    if not model.capacity_units or any(
            model.variables[k].kind is VarKind.CONTINUOUS for k in range(m * n)):
        return -math.inf
    lo = np.ceil(lower[:m * n] - INTEGRALITY_TOL).reshape(m, n)
    up = np.floor(upper[:m * n] + INTEGRALITY_TOL).reshape(m, n)
    price = np.array([float(v) for v in model.objective[:m * n]]).reshape(m, n)
    if np.any(lo.sum(axis=1) > np.array(model.workloads)) or \
            np.any(up.sum(axis=1) < np.array(model.workloads)):
        return math.inf
    cost = float((price * lo).sum())
    room = np.minimum(np.array(model.capacity_units, dtype=float), up.sum(axis=0)) - lo.sum(axis=0)
    if np.any(room < 0):
        return math.inf
    units = sum(model.workloads) - lo.sum()
    cheapest = price.min(axis=0)
    for j in np.lexsort((np.arange(n), cheapest)):
        if units <= 0:
            break
        take = min(units, room[j])
        cost += take * cheapest[j]
        units -= take
    return cost if units <= 0 else math.inf


def _branch_variable(model: MilpModel, values: np.ndarray):
    """Most fractional allocation variable, then most fractional indicator."""
    mn = model.n_sources * model.n_processors
    groups = (range(mn), range(mn, model.n_variables))
    for group in groups:
        best, best_frac = None, INTEGRALITY_TOL
        for k in group:
            if model.variables[k].kind is VarKind.CONTINUOUS:
                continue
            f = _fractionality(values[k])
            if f > best_frac:
                best, best_frac = k, f
        if best is not None:
            return best
    return None


def solve_milp(model: MilpModel, incumbent: Allocation | None = None,
               node_limit: int = NODE_LIMIT) -> tuple[MilpSolution, SearchStats]:
    """Minimize ``model`` over its integer/binary variables.

    Nodes are explored depth-first, down-branch first; the branching
    variable is the most fractional allocation variable (then indicator),
    ties to the lowest index. ``incumbent`` seeds the pruning bound when it
    is feasible for the model.
    """
    stats = SearchStats()
    relaxed = lp_relaxation(model)
    integral_obj = _integral_objective(model)

    best_point = None
    best_obj = math.inf
    if incumbent is not None:
        point = point_from_allocation(model, incumbent)
        if not point_violations(model, point):
            best_point, best_obj = point, float(point_objective(model, point))
            stats.incumbent_updates += 1

    def prunable(bound: float) -> bool:
        if math.isinf(bound):
            return bound > 0
        if integral_obj:
            return math.ceil(bound - INTEGRALITY_TOL) >= best_obj - 0.5
        return bound >= best_obj - TOL * max(1.0, abs(best_obj))

    stack = [(np.array(relaxed.lower), np.array(relaxed.upper), -math.inf)]
    exhausted = True
    numerical_trouble = False
    while stack:
        if stats.nodes_explored >= node_limit:
            exhausted = False
            break
        lower, upper, parent_bound = stack.pop()
        if parent_bound > -math.inf and prunable(parent_bound):
            continue
        fill = _fill_bound(model, lower, upper)
        if prunable(fill):
            stats.nodes_explored += 1
            continue
        sol = solve_lp(relaxed, lower=lower, upper=upper)
        stats.nodes_explored += 1
        if sol.status is Status.INFEASIBLE:
            continue
        if sol.status is Status.UNBOUNDED:
            stats.best_bound = -math.inf
            return MilpSolution(Status.UNBOUNDED), stats
        if sol.status is Status.NUMERICAL_FAILURE:
            numerical_trouble = True
            continue
        bound = max(sol.objective_value, fill)
        if prunable(bound):
            continue
        values = np.asarray(sol.values)
        k = _branch_variable(model, values)
        if k is None or k >= model.n_sources * model.n_processors:
            point = _candidate_point(model, values)
            if point is not None:
                obj = float(point_objective(model, point))
                if obj < best_obj:
                    best_point, best_obj = point, obj
                    stats.incumbent_updates += 1
                continue
            if k is None:
                numerical_trouble = True
                continue
        v = values[k]
        down_upper = upper.copy()
        down_upper[k] = math.floor(v)
        up_lower = lower.copy()
        up_lower[k] = math.ceil(v)
        stack.append((up_lower, upper, bound))
        stack.append((lower, down_upper, bound))

    open_bounds = [b for _, _, b in stack]
    if exhausted and not numerical_trouble:
        stats.proven_optimal = best_point is not None
        stats.best_bound = best_obj
    else:
        stats.best_bound = min([best_obj] + open_bounds)
    if best_point is None:
        if not exhausted:
            status = Status.NODE_LIMIT
        else:
            status = Status.NUMERICAL_FAILURE if numerical_trouble else Status.INFEASIBLE
        return MilpSolution(status), stats
    return MilpSolution(Status.OPTIMAL, tuple(float(v) for v in best_point), best_obj), stats


def extract_allocation(sol: MilpSolution, inst: ProblemInstance, *, integral: bool = True) -> Allocation:
    """Allocation matrix from the first ``m*n`` solution values."""
    if sol.status is not Status.OPTIMAL:
        raise AllocationConsistencyError(f"no allocation in a {sol.status.value} solution")
    m, n = inst.n_sources, inst.n_processors
    rows = []
    for i in range(m):
        row = []
        for j in range(n):
            v = sol.values[i * n + j]
            if integral:
                if _fractionality(v) > INTEGRALITY_TOL:
                    raise AllocationConsistencyError(f"non-integral amount {v} at ({i}, {j})")
                row.append(Fraction(round(v)))
            else:
                row.append(Fraction(v).limit_denominator(10**6))
        rows.append(tuple(row))
    alloc = Allocation(tuple(rows))
    if integral:
        for i, s in enumerate(inst.sources):
            if sum(alloc.amounts[i], Fraction(0)) != s.workload:
                raise AllocationConsistencyError(f"source {s.id} does not sum to its workload")
    return alloc


def _fill(units: int, slots: list[tuple[Fraction, int]]) -> Fraction | None:
    """Cheapest way to place ``units`` into (per-unit price, capacity) slots."""
    total = Fraction(0)
    for price, cap in sorted(slots, key=lambda s: s[0]):
        if units <= 0:
            break
        take = min(units, cap)
        total += take * price
        units -= take
    return total if units <= 0 else None


def greedy_allocate(inst: ProblemInstance) -> Allocation | None:
    """Deadline-ordered cheapest-first fill; None when some source cannot be placed.

    A processor takes the largest chunk that still lets the rest of the
    source finish on the not-yet-visited processors, both in time (fastest
    fill) and money (cheapest fill).
    """
    m, n = inst.n_sources, inst.n_processors
    room = [p.available_time for p in inst.processors]
    rows = [[Fraction(0)] * n for _ in range(m)]
    order = sorted(range(m), key=lambda i: (inst.sources[i].deadline, i))
    procs = sorted(range(n), key=lambda j: (inst.processors[j].cost_per_unit,
                                            inst.processors[j].time_per_unit,
                                            inst.processors[j].id))
    for i in order:
        s = inst.sources[i]
        remaining = int(s.workload)
        time_left, money_left = s.deadline, s.budget
        for pos, j in enumerate(procs):
            if remaining == 0:
                break
            p = inst.processors[j]
            cap = math.floor(room[j] / p.unit_time)
            later = procs[pos + 1:]
            caps = [(inst.processors[k], math.floor(room[k] / inst.processors[k].unit_time)) for k in later]
            chosen = None
            for q in range(min(remaining, cap), -1, -1):
                rest = remaining - q
                t_rest = _fill(rest, [(lp.unit_time, c) for lp, c in caps])
                c_rest = _fill(rest, [(lp.cost_per_unit, c) for lp, c in caps])
                if t_rest is None or c_rest is None:
                    continue
                if q * p.unit_time + t_rest <= time_left and q * p.cost_per_unit + c_rest <= money_left:
                    chosen = q
                    break
            if chosen is None:
                return None
            rows[i][j] = Fraction(chosen)
            remaining -= chosen
            room[j] -= chosen * p.unit_time
            time_left -= chosen * p.unit_time
            money_left -= chosen * p.cost_per_unit
        if remaining:
            return None
    alloc = Allocation(tuple(tuple(r) for r in rows))
    return alloc if evaluate(inst, alloc).feasible else None


__all__ = [
    "AllocationConsistencyError",
    "SearchStats",
    "extract_allocation",
    "greedy_allocate",
    "solve_milp",
]
