"""Brute-force optimizer and analytic bound used to certify the main solver.

Nothing here touches the simplex or branch-and-bound code. The enumeration
walks (source, processor) cells in file order, trying every whole-unit
amount, and prunes only partial assignments that already break a
constraint or whose cheapest-fill completion cannot beat the best found.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import Allocation, ProblemInstance, ProcessorSpec, SourceSpec
from .validator import evaluate

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
LIMIT_EXCEEDED = "LimitExceeded"


@dataclass(frozen=True)
class OracleLimits:
    max_total_units: int = 24
    max_processors: int = 5
    node_budget: int = 2_000_000

    def __post_init__(self):
        if min(self.max_total_units, self.max_processors, self.node_budget) <= 0:
            raise ValueError("oracle limits must be positive")


@dataclass(frozen=True)
class OracleResult:
    status: str
    objective: Fraction | None = None
    allocation: Allocation | None = None
    nodes: int = 0
    reason: str = ""


def _unit_capacities(inst: ProblemInstance) -> list[int]:
    return [math.floor(p.available_time / (p.transfer_per_unit + p.time_per_unit))
            for p in inst.processors]


def _cheapest_fill(units, prices, caps):
    cost = Fraction(0)
    for price, cap in sorted(zip(prices, caps), key=lambda pc: pc[0]):
        if units <= 0:
            break
        take = min(units, cap)
        cost += take * price
        units -= take
    return cost if units <= 0 else None


def cost_lower_bound(inst: ProblemInstance) -> Fraction | None:
    """Cheapest-first fill of all workload into whole-unit capacities.

    Drops deadlines and budgets, so it never exceeds the true optimum.
    Returns None when total capacity is below total workload (infeasible).
    """
    total = sum(int(s.workload) for s in inst.sources)
    return _cheapest_fill(total, [p.cost_per_unit for p in inst.processors], _unit_capacities(inst))


def oracle_solve(inst: ProblemInstance, limits: OracleLimits = OracleLimits()) -> OracleResult:
    """Exact minimum-cost integer allocation by exhaustive search."""
    m, n = inst.n_sources, inst.n_processors
    total = sum(int(s.workload) for s in inst.sources)
    if total > limits.max_total_units:
        return OracleResult(LIMIT_EXCEEDED, reason=f"total workload {total} > {limits.max_total_units} units")
    if n > limits.max_processors:
        return OracleResult(LIMIT_EXCEEDED, reason=f"{n} processors > {limits.max_processors}")

    w = [p.transfer_per_unit + p.time_per_unit for p in inst.processors]
    c = [p.cost_per_unit for p in inst.processors]
    room = [p.available_time for p in inst.processors]
    left = [int(s.workload) for s in inst.sources]
    time_used = [Fraction(0)] * m
    cost_used = [Fraction(0)] * m
    grid = [[0] * n for _ in range(m)]

    best_cost: Fraction | None = None
    best_grid = None
    nodes = 0

    class Budget(Exception):
        pass

    def search(cell: int, spent: Fraction):
        nonlocal best_cost, best_grid, nodes
        nodes += 1
        if nodes > limits.node_budget:
            raise Budget
        if cell == m * n:
            if best_cost is None or spent < best_cost:
                best_cost, best_grid = spent, [row[:] for row in grid]
            return
        units_left = sum(left)
        caps = [math.floor(room[j] / w[j]) for j in range(n)]
        completion = _cheapest_fill(units_left, c, caps)
        if completion is None:
            return
        if best_cost is not None and spent + completion >= best_cost:
            return

        i, j = divmod(cell, n)
        s = inst.sources[i]
        top = min(left[i], caps[j])
        top = min(top, math.floor((s.deadline - time_used[i]) / w[j]))
        if c[j] > 0:
            top = min(top, math.floor((s.budget - cost_used[i]) / c[j]))
        low = left[i] if j == n - 1 else 0  # last cell of a row closes the source
        for q in range(top, low - 1, -1):
            grid[i][j] = q
            left[i] -= q
            room[j] -= q * w[j]
            time_used[i] += q * w[j]
            cost_used[i] += q * c[j]
            search(cell + 1, spent + q * c[j])
            cost_used[i] -= q * c[j]
            time_used[i] -= q * w[j]
            room[j] += q * w[j]
            left[i] += q
        grid[i][j] = 0

    try:
        search(0, Fraction(0))
    except Budget:
        return OracleResult(LIMIT_EXCEEDED, nodes=nodes, reason=f"node budget {limits.node_budget} exhausted")

    if best_grid is None:
        return OracleResult(INFEASIBLE, nodes=nodes)
    alloc = Allocation(tuple(tuple(Fraction(v) for v in row) for row in best_grid))
    report = evaluate(inst, alloc)
    if not report.feasible or report.total_cost != best_cost:
        raise AssertionError(f"oracle produced an invalid allocation: {report.labels()}")
    return OracleResult(OPTIMAL, best_cost, alloc, nodes)


def random_instance(seed: int, max_sources: int = 3, max_processors: int = 4,
                    max_total_units: int = 20) -> ProblemInstance:
    """Small integer instance for solver/oracle equivalence runs.

    Spans feasible and infeasible cases: deadlines and budgets are drawn
    between one and six times the workload.
    """
    rng = random.Random(seed)
    m = rng.randint(1, max_sources)
    n = rng.randint(1, max_processors)
    processors = tuple(
        ProcessorSpec(
            id=f"P{j + 1}",
            time_per_unit=Fraction(rng.randint(1, 5)),
            cost_per_unit=Fraction(rng.randint(1, 5)),
            transfer_per_unit=Fraction(rng.randint(0, 1)),
            available_time=Fraction(rng.randint(5, 40)),
        )
        for j in range(n)
    )
    while True:
        loads = [rng.randint(3, 10) for _ in range(m)]
        if sum(loads) <= max_total_units:
            break
    sources = tuple(
        SourceSpec(
            id=f"S{i + 1}",
            workload=Fraction(wl),
            budget=Fraction(rng.randint(wl, 6 * wl)),
            deadline=Fraction(rng.randint(wl, 6 * wl)),
        )
        for i, wl in enumerate(loads)
    )
    return ProblemInstance(processors, sources)
