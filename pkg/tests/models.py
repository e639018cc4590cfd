"""Hand-built LP models for simplex tests."""
from fractions import Fraction

from gridalloc.formulation import Constraint, MilpModel, Relation, Variable, VarKind


def lp(objective, rows, bounds):
    """``rows`` are (coefficients, relation, rhs); ``bounds`` are (lower, upper|None)."""
    variables = tuple(
        Variable(f"v{k}", VarKind.CONTINUOUS, Fraction(lo), None if hi is None else Fraction(hi))
        for k, (lo, hi) in enumerate(bounds)
    )
    constraints = tuple(
        Constraint(tuple(Fraction(v) for v in coeffs), Relation(rel), Fraction(rhs), f"r{k}")
        for k, (coeffs, rel, rhs) in enumerate(rows)
    )
    return MilpModel(variables, tuple(Fraction(v) for v in objective), constraints)
