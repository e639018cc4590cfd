"""Report documents with a fixed key order and fixed number formatting."""
from __future__ import annotations

import json
import math
from fractions import Fraction

from .core import Allocation, ProblemInstance, allocation_to_data, json_number
from .validator import FeasibilityReport, report_to_data

SOLVER_DIGITS = 9  # floats from the LP engine are rounded to the solver tolerance


def solver_number(value: float | None):
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return None
    value = round(float(value), SOLVER_DIGITS) + 0.0
    return int(value) if value == int(value) else value


def exact_or_solver(value):
    if value is None:
        return None
    if isinstance(value, (Fraction, int)):
        return json_number(value)
    return solver_number(value)


def solve_document(*, inst: ProblemInstance, method: str, mode: str, strict_eq6: bool,
                   status: str, objective, allocation: Allocation | None,
                   feasibility: FeasibilityReport | None, search: dict | None,
                   lower_bound) -> dict:
    doc = {
        "command": "solve",
        "method": method,
        "mode": mode,
        "strict_eq6": strict_eq6,
        "status": status,
        "objective": exact_or_solver(objective),
        "allocation": allocation_to_data(allocation, inst) if allocation is not None else None,
    }
    if feasibility is not None:
        detail = report_to_data(feasibility, inst)
        doc["completion_times"] = detail["completion_times"]
        doc["source_costs"] = detail["source_costs"]
        doc["processor_busy"] = detail["processor_busy"]
        doc["total_cost"] = detail["total_cost"]
    else:
        doc["completion_times"] = doc["source_costs"] = doc["processor_busy"] = None
        doc["total_cost"] = None
    doc["search"] = search
    doc["cost_lower_bound"] = exact_or_solver(lower_bound)
    return doc


def validate_document(report: FeasibilityReport, inst: ProblemInstance, strict_eq6: bool) -> dict:
    return {"command": "validate", "strict_eq6": strict_eq6, **report_to_data(report, inst)}


def render(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"
