"""MILP model for the cost-minimizing allocation problem.

Variables are ``a[i,j]`` (units of source i on processor j) followed by the
binary usage indicators ``x[i,j]``, both in row-major (source, processor)
order. Products ``a*x`` never appear: the linking rows ``a <= M*x`` make
``a`` alone exact in the objective, deadline, availability and budget rows.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .core import Allocation, ProblemInstance, big_m, capacity_units, json_number


class VarKind(str, enum.Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    BINARY = "binary"


class Relation(str, enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Mode(str, enum.Enum):
    INTEGER = "integer"
    CONTINUOUS = "continuous"


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"
    NODE_LIMIT = "NodeLimit"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    lower: Fraction
    upper: Fraction | None  # None means unbounded above


@dataclass(frozen=True)
class Constraint:
    coefficients: tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction
    label: str


@dataclass(frozen=True, eq=False)
class MilpModel:
    variables: tuple[Variable, ...]
    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...]
    n_sources: int = 0
    n_processors: int = 0
    # whole units each processor can take and each source must place; lets
    # branch-and-bound compute a capacity-fill bound alongside the LP
    capacity_units: tuple[int, ...] = ()
    workloads: tuple[int, ...] = ()

    def __post_init__(self):
        n = len(self.variables)
        if len(self.objective) != n:
            raise ValueError("objective length does not match variable count")
        labels = set()
        for c in self.constraints:
            if len(c.coefficients) != n:
                raise ValueError(f"row {c.label}: coefficient length {len(c.coefficients)} != {n}")
            if c.label in labels:
                raise ValueError(f"duplicate constraint label {c.label}")
            labels.add(c.label)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def alpha_index(self, i: int, j: int) -> int:
        return i * self.n_processors + j

    def x_index(self, i: int, j: int) -> int:
        return self.n_sources * self.n_processors + i * self.n_processors + j

    # float views for the simplex engine
    @cached_property
    def c(self) -> np.ndarray:
        arr = np.array([float(v) for v in self.objective], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def A(self) -> np.ndarray:
        arr = np.array([[float(v) for v in c.coefficients] for c in self.constraints],
                       dtype=float).reshape(len(self.constraints), self.n_variables)
        arr.setflags(write=False)
        return arr

    @cached_property
    def b(self) -> np.ndarray:
        arr = np.array([float(c.rhs) for c in self.constraints], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def lower(self) -> np.ndarray:
        arr = np.array([float(v.lower) for v in self.variables], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def upper(self) -> np.ndarray:
        arr = np.array([np.inf if v.upper is None else float(v.upper) for v in self.variables],
                       dtype=float)
        arr.setflags(write=False)
        return arr

    def with_bounds(self, index: int, lower=None, upper=None) -> "MilpModel":
        """Copy of the model with one variable's bounds replaced."""
        v = self.variables[index]
        new = replace(
            v,
            lower=v.lower if lower is None else Fraction(lower),
            upper=v.upper if upper is None else Fraction(upper),
        )
        variables = self.variables[:index] + (new,) + self.variables[index + 1:]
        return replace(self, variables=variables)


@dataclass(frozen=True)
class MilpSolution:
    status: Status
    values: tuple[float, ...] = ()
    objective_value: float | None = None


def build_milp(inst: ProblemInstance, mode: Mode | str = Mode.INTEGER,
               strict_eq6: bool = False) -> MilpModel:
    """Translate ``inst`` into the linearized MILP.

    With ``strict_eq6`` every processor must carry exactly one usage
    indicator, i.e. it may serve at most one source.
    """
    mode = Mode(mode)
    m, n = inst.n_sources, inst.n_processors
    nv = 2 * m * n
    alpha_kind = VarKind.INTEGER if mode is Mode.INTEGER else VarKind.CONTINUOUS
    zero = Fraction(0)

    variables = []
    for i, s in enumerate(inst.sources):
        for j, p in enumerate(inst.processors):
            variables.append(Variable(f"a[{s.id},{p.id}]", alpha_kind, zero, Fraction(big_m(inst, i, j))))
    for s in inst.sources:
        for p in inst.processors:
            variables.append(Variable(f"x[{s.id},{p.id}]", VarKind.BINARY, zero, Fraction(1)))

    def a(i, j):
        return i * n + j

    def x(i, j):
        return m * n + i * n + j

    def row(entries):
        coeffs = [zero] * nv
        for k, v in entries:
            coeffs[k] += v
        return tuple(coeffs)

    objective = row((a(i, j), p.cost_per_unit)
                    for i in range(m) for j, p in enumerate(inst.processors))

    rows = []
    for i, s in enumerate(inst.sources):
        rows.append(Constraint(row((a(i, j), p.unit_time) for j, p in enumerate(inst.processors)),
                               Relation.LE, s.deadline, f"deadline:{s.id}"))
    for j, p in enumerate(inst.processors):
        rows.append(Constraint(row((a(i, j), p.unit_time) for i in range(m)),
                               Relation.LE, p.available_time, f"availability:{p.id}"))
    for i, s in enumerate(inst.sources):
        rows.append(Constraint(row((a(i, j), p.cost_per_unit) for j, p in enumerate(inst.processors)),
                               Relation.LE, s.budget, f"budget:{s.id}"))
    for i, s in enumerate(inst.sources):
        rows.append(Constraint(row((a(i, j), Fraction(1)) for j in range(n)),
                               Relation.EQ, s.workload, f"conservation:{s.id}"))
    for i, s in enumerate(inst.sources):
        for j, p in enumerate(inst.processors):
            rows.append(Constraint(row([(a(i, j), Fraction(1)), (x(i, j), -Fraction(big_m(inst, i, j)))]),
                                   Relation.LE, zero, f"linking:{s.id}:{p.id}"))
    if strict_eq6:
        for j, p in enumerate(inst.processors):
            rows.append(Constraint(row((x(i, j), Fraction(1)) for i in range(m)),
                                   Relation.EQ, Fraction(1), f"assignment:{p.id}"))

    return MilpModel(
        tuple(variables), objective, tuple(rows), m, n,
        capacity_units=tuple(capacity_units(p) for p in inst.processors),
        workloads=tuple(int(s.workload) for s in inst.sources),
    )


def lp_relaxation(model: MilpModel) -> MilpModel:
    """Same model with every integer/binary variable made continuous."""
    if all(v.kind is VarKind.CONTINUOUS for v in model.variables):
        return model
    variables = tuple(replace(v, kind=VarKind.CONTINUOUS) for v in model.variables)
    return replace(model, variables=variables)


def point_from_allocation(model: MilpModel, alloc: Allocation) -> tuple[Fraction, ...]:
    """Model point for ``alloc`` with ``x = 1`` exactly where units are placed.

    Under strict assignment rows an idle processor column still needs one
    indicator; it goes to the first source.
    """
    m, n = model.n_sources, model.n_processors
    values = [Fraction(0)] * model.n_variables
    for i in range(m):
        for j in range(n):
            values[model.alpha_index(i, j)] = alloc[i, j]
            if alloc[i, j] > 0:
                values[model.x_index(i, j)] = Fraction(1)
    if any(c.label.startswith("assignment:") for c in model.constraints):
        for j in range(n):
            if m and not any(alloc[i, j] > 0 for i in range(m)):
                values[model.x_index(0, j)] = Fraction(1)
    return tuple(values)


def point_objective(model: MilpModel, point) -> Fraction:
    return sum((c * Fraction(v) for c, v in zip(model.objective, point)), Fraction(0))


def point_violations(model: MilpModel, point, slack: Fraction = Fraction(0)) -> list[str]:
    """Labels of rows/bounds the point breaks, checked in exact arithmetic.

    ``slack`` widens every row and bound (zero means exact).
    """
    point = [Fraction(v) for v in point]
    bad = []
    for v, val in zip(model.variables, point):
        if val < v.lower - slack or (v.upper is not None and val > v.upper + slack):
            bad.append(f"bounds:{v.name}")
        if v.kind is not VarKind.CONTINUOUS and val.denominator != 1:
            bad.append(f"integrality:{v.name}")
    for c in model.constraints:
        lhs = sum((k * val for k, val in zip(c.coefficients, point) if k), Fraction(0))
        ok = {Relation.LE: lhs <= c.rhs + slack, Relation.EQ: abs(lhs - c.rhs) <= slack,
              Relation.GE: lhs >= c.rhs - slack}[c.relation]
        if not ok:
            bad.append(c.label)
    return bad


def dump_model(model: MilpModel) -> str:
    """Line-oriented debug listing: ``name: lhs relation rhs``."""

    def lin(coeffs):
        terms = []
        for k, v in zip(coeffs, model.variables):
            if k == 0:
                continue
            sign = "-" if k < 0 else "+"
            mag = abs(k)
            term = v.name if mag == 1 else f"{json_number(mag)} {v.name}"
            terms.append(f"{sign} {term}")
        if not terms:
            return "0"
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    lines = [f"minimize: {lin(model.objective)}"]
    for c in model.constraints:
        lines.append(f"{c.label}: {lin(c.coefficients)} {c.relation.value} {json_number(c.rhs)}")
    for v in model.variables:
        ub = "inf" if v.upper is None else json_number(v.upper)
        lines.append(f"bounds:{v.name}: {json_number(v.lower)} <= {v.name} <= {ub} ({v.kind.value})")
    return "\n".join(lines) + "\n"
