"""Exact replay of an allocation against an instance.

This module is the single home of the completion-time semantics: a source's
completion time is the sum of (transfer + processing) minutes over all of
its chunks, since the broker ships chunks one after another.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Allocation, ProblemInstance, json_number


@dataclass(frozen=True)
class Violation:
    label: str
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[Violation, ...]
    completion_times: tuple[Fraction, ...]
    source_costs: tuple[Fraction, ...]
    processor_busy: tuple[Fraction, ...]
    total_cost: Fraction

    def labels(self) -> list[str]:
        return [v.label for v in self.violations]


def _check_shape(inst: ProblemInstance, alloc: Allocation) -> None:
    if not alloc.matches(inst):
        raise ValueError(
            f"allocation shape {alloc.shape} does not match instance "
            f"({inst.n_sources} sources x {inst.n_processors} processors)"
        )


def completion_time(inst: ProblemInstance, alloc: Allocation, i: int) -> Fraction:
    return sum((p.unit_time * alloc[i, j] for j, p in enumerate(inst.processors)), Fraction(0))


def source_cost(inst: ProblemInstance, alloc: Allocation, i: int) -> Fraction:
    return sum((p.cost_per_unit * alloc[i, j] for j, p in enumerate(inst.processors)), Fraction(0))


def processor_busy_time(inst: ProblemInstance, alloc: Allocation, j: int) -> Fraction:
    w = inst.processors[j].unit_time
    return sum((w * alloc[i, j] for i in range(inst.n_sources)), Fraction(0))


def evaluate(inst: ProblemInstance, alloc: Allocation, *, integer: bool = True,
             strict_eq6: bool = False) -> FeasibilityReport:
    """Check conservation, deadlines, budgets, availability and sign/integrality.

    ``strict_eq6`` additionally requires every processor to serve at most
    one source (``assignment:<processor>``).
    """
    _check_shape(inst, alloc)
    m, n = inst.n_sources, inst.n_processors
    violations: list[Violation] = []

    for i, s in enumerate(inst.sources):
        for j, p in enumerate(inst.processors):
            v = alloc[i, j]
            if v < 0:
                violations.append(Violation(f"nonnegativity:{s.id}:{p.id}", v, Fraction(0)))
            if integer and v.denominator != 1:
                violations.append(Violation(f"integrality:{s.id}:{p.id}", v, Fraction(round(v))))

    times = tuple(completion_time(inst, alloc, i) for i in range(m))
    costs = tuple(source_cost(inst, alloc, i) for i in range(m))
    busy = tuple(processor_busy_time(inst, alloc, j) for j in range(n))

    for i, s in enumerate(inst.sources):
        placed = sum(alloc.amounts[i], Fraction(0))
        if placed != s.workload:
            violations.append(Violation(f"conservation:{s.id}", placed, s.workload))
    for i, s in enumerate(inst.sources):
        if times[i] > s.deadline:
            violations.append(Violation(f"deadline:{s.id}", times[i], s.deadline))
    for i, s in enumerate(inst.sources):
        if costs[i] > s.budget:
            violations.append(Violation(f"budget:{s.id}", costs[i], s.budget))
    for j, p in enumerate(inst.processors):
        if busy[j] > p.available_time:
            violations.append(Violation(f"availability:{p.id}", busy[j], p.available_time))
    if strict_eq6:
        for j, p in enumerate(inst.processors):
            served = sum(1 for i in range(m) if alloc[i, j] > 0)
            if served > 1:
                violations.append(Violation(f"assignment:{p.id}", Fraction(served), Fraction(1)))

    return FeasibilityReport(
        feasible=not violations,
        violations=tuple(violations),
        completion_times=times,
        source_costs=costs,
        processor_busy=busy,
        total_cost=sum(costs, Fraction(0)),
    )


def report_to_data(report: FeasibilityReport, inst: ProblemInstance) -> dict:
    """Fixed-order document form of a report."""
    return {
        "feasible": report.feasible,
        "violations": [
            {"constraint": v.label, "lhs": json_number(v.lhs), "rhs": json_number(v.rhs)}
            for v in report.violations
        ],
        "completion_times": {s.id: json_number(t) for s, t in zip(inst.sources, report.completion_times)},
        "source_costs": {s.id: json_number(c) for s, c in zip(inst.sources, report.source_costs)},
        "processor_busy": {p.id: json_number(b) for p, b in zip(inst.processors, report.processor_busy)},
        "total_cost": json_number(report.total_cost),
    }
