"""Dense bounded-variable primal simplex.

Every structural variable keeps its own ``[lower, upper]`` interval and sits
at one of its bounds while nonbasic, so bounds never become tableau rows.
Phase 1 starts from an all-artificial basis. Pricing is Dantzig's rule and
falls back to Bland's rule once the objective stalls.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .formulation import MilpModel, Relation, Status, VarKind

TOL = 1e-9
PIVOT_TOL = 1e-11
STALL_LIMIT = 50
MAX_ITERATIONS = 20_000


@dataclass(frozen=True)
class LpCertificate:
    """Optimal basis plus row duals, or the phase-1 duals when infeasible."""

    basis: tuple[int, ...] = ()
    duals: tuple[float, ...] = ()
    ray: tuple[float, ...] = ()


@dataclass(frozen=True)
class LpSolution:
    status: Status
    values: tuple[float, ...] = ()
    objective_value: float | None = None
    certificate: LpCertificate = field(default_factory=LpCertificate)
    iterations: int = 0
    phase1_objective: float | None = None


class _Tableau:
    """Working state for one solve. Columns: structurals, slacks, artificials."""

    def __init__(self, model: MilpModel, lower: np.ndarray, upper: np.ndarray):
        A = np.asarray(model.A, dtype=float)
        b = np.asarray(model.b, dtype=float)
        m, n = A.shape
        slack_rows, slack_signs = [], []
        for k, c in enumerate(model.constraints):
            if c.relation is not Relation.EQ:
                slack_rows.append(k)
                slack_signs.append(1.0 if c.relation is Relation.LE else -1.0)
        ns = len(slack_rows)
        S = np.zeros((m, ns))
        S[slack_rows, np.arange(ns)] = slack_signs

        self.m, self.n, self.ns = m, n, ns
        self.n_total = n + ns + m
        self.art0 = n + ns
        self.lower = np.concatenate([lower, np.zeros(ns), np.zeros(m)])
        self.upper = np.concatenate([upper, np.full(ns, np.inf), np.full(m, np.inf)])

        x = np.zeros(self.n_total)
        x[:n] = lower
        resid = b - A @ x[:n]
        self.sign = np.where(resid >= 0, 1.0, -1.0)
        self.A_ext = np.hstack([A * self.sign[:, None], S * self.sign[:, None], np.eye(m)])
        self.b_ext = b * self.sign
        self.basis = list(range(self.art0, self.n_total))
        x[self.art0:] = np.abs(resid)
        # crash: a slack whose signed column is +e_k starts basic and its
        # row's artificial is pinned at zero
        for q, k in enumerate(slack_rows):
            if self.A_ext[k, n + q] > 0:
                self.basis[k] = n + q
                x[n + q] = abs(resid[k])
                x[self.art0 + k] = 0.0
                self.upper[self.art0 + k] = 0.0
        self.x = x
        self.T = self.A_ext.copy()
        self.is_basic = np.zeros(self.n_total, dtype=bool)
        self.is_basic[self.basis] = True
        self.iterations = 0

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        return cost - cost[self.basis] @ self.T

    def choose_entering(self, d: np.ndarray, bland: bool, allowed: np.ndarray):
        movable = allowed & ~self.is_basic & (self.upper - self.lower > 0)
        at_upper = self.x >= self.upper
        up = movable & ~at_upper & (d < -TOL)
        down = movable & at_upper & (d > TOL)
        score = np.where(up, -d, 0.0) + np.where(down, d, 0.0)
        eligible = np.flatnonzero(up | down)
        if eligible.size == 0:
            return None, 0.0
        # argmax returns the lowest index among equal scores
        q = int(eligible[0]) if bland else int(eligible[np.argmax(score[eligible])])
        return q, (1.0 if up[q] else -1.0)

    def ratio_test(self, q: int, direction: float, bland: bool):
        g = direction * self.T[:, q]
        basis = np.asarray(self.basis)
        xb, lb, ub = self.x[basis], self.lower[basis], self.upper[basis]
        limits = np.full(self.m, np.inf)
        dec = g > PIVOT_TOL
        inc = (g < -PIVOT_TOL) & np.isfinite(ub)
        limits[dec] = np.maximum(xb[dec] - lb[dec], 0.0) / g[dec]
        limits[inc] = np.maximum(ub[inc] - xb[inc], 0.0) / -g[inc]
        flip = self.upper[q] - self.lower[q]
        best = limits.min() if self.m else np.inf
        if not np.isfinite(best) or flip <= best:
            return flip, None, False
        ties = np.flatnonzero(limits <= best + 1e-12)
        if bland:
            r = int(ties[np.argmin(basis[ties])])
        else:
            # largest pivot magnitude, then lowest variable index
            order = np.lexsort((basis[ties], -np.abs(g[ties])))
            r = int(ties[order[0]])
        return float(limits[r]), r, bool(inc[r])

    def step(self, q: int, direction: float, theta: float, r, to_upper: bool):
        col = self.T[:, q].copy()
        delta = direction * theta
        self.x[q] += delta
        self.x[self.basis] -= delta * col
        if r is None:
            self.x[q] = self.upper[q] if direction > 0 else self.lower[q]
            return
        leaving = self.basis[r]
        self.x[leaving] = self.upper[leaving] if to_upper else self.lower[leaving]
        self.T[r] /= self.T[r, q]
        col[r] = 0.0
        self.T -= np.outer(col, self.T[r])
        self.basis[r] = q
        self.is_basic[leaving] = False
        self.is_basic[q] = True

    def run(self, cost: np.ndarray, allowed: np.ndarray, max_iter: int) -> str:
        bland = False
        best_obj = float(cost @ self.x)
        stall = 0
        while True:
            if self.iterations >= max_iter:
                return "limit"
            d = self.reduced_costs(cost)
            q, direction = self.choose_entering(d, bland, allowed)
            if q is None:
                return "optimal"
            theta, r, to_upper = self.ratio_test(q, direction, bland)
            if not np.isfinite(theta):
                self.unbounded_column = (q, direction)
                return "unbounded"
            self.step(q, direction, theta, r, to_upper)
            self.iterations += 1
            obj = float(cost @ self.x)
            if obj < best_obj - 1e-12 * max(1.0, abs(best_obj)):
                best_obj, stall = obj, 0
            else:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True

    def drive_out_artificials(self):
        for r in range(self.m):
            bv = self.basis[r]
            if bv < self.art0:
                continue
            row = self.T[r, : self.art0]
            candidates = [q for q in range(self.art0)
                          if not self.is_basic[q] and abs(row[q]) > 1e-9]
            if candidates:
                q = max(candidates, key=lambda k: (abs(row[k]), -k))
                self.step(q, 1.0, 0.0, r, False)

    def refine(self):
        """Recompute basic values from the original rows."""
        B = self.A_ext[:, self.basis]
        x = self.x.copy()
        x[self.basis] = 0.0
        rhs = self.b_ext - self.A_ext @ x
        try:
            x[self.basis] = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            return
        self.x = x

    def duals(self, cost: np.ndarray) -> np.ndarray:
        B = self.A_ext[:, self.basis]
        try:
            y = np.linalg.solve(B.T, cost[self.basis])
        except np.linalg.LinAlgError:
            y = np.linalg.lstsq(B.T, cost[self.basis], rcond=None)[0]
        return y * self.sign


def solve_lp(model: MilpModel, max_iterations: int = MAX_ITERATIONS,
             lower: np.ndarray | None = None, upper: np.ndarray | None = None) -> LpSolution:
    """Minimize ``model`` treating every variable as continuous.

    Lower bounds must be finite. ``lower``/``upper`` override the model's
    variable bounds (branch-and-bound nodes use this). Never returns a wrong
    answer on hitting the iteration limit; the status is ``NumericalFailure``.
    """
    if any(v.kind is not VarKind.CONTINUOUS for v in model.variables):
        raise ValueError("solve_lp takes a continuous model; use lp_relaxation first")
    lower = np.asarray(model.lower if lower is None else lower, dtype=float)
    upper = np.asarray(model.upper if upper is None else upper, dtype=float)
    if not np.all(np.isfinite(lower)):
        raise ValueError("solve_lp needs finite lower bounds")
    if np.any(lower > upper):
        return LpSolution(Status.INFEASIBLE, phase1_objective=float("inf"))

    tab = _Tableau(model, lower, upper)
    n = tab.n

    # phase 1
    cost1 = np.zeros(tab.n_total)
    cost1[tab.art0:] = 1.0
    allowed = np.ones(tab.n_total, dtype=bool)
    outcome = tab.run(cost1, allowed, max_iterations)
    if outcome == "limit":
        return LpSolution(Status.NUMERICAL_FAILURE, iterations=tab.iterations)
    tab.refine()
    phase1 = float(np.sum(tab.x[tab.art0:]))
    scale = max(1.0, float(np.max(np.abs(model.b))) if len(model.b) else 1.0)
    if phase1 > TOL * scale:
        y1 = tab.duals(cost1)
        return LpSolution(Status.INFEASIBLE, certificate=LpCertificate(
            tuple(tab.basis), tuple(float(v) for v in y1)),
            iterations=tab.iterations, phase1_objective=phase1)

    # phase 2: artificials pinned at zero
    tab.upper[tab.art0:] = 0.0
    tab.x[tab.art0:] = np.clip(tab.x[tab.art0:], 0.0, 0.0)
    tab.drive_out_artificials()
    allowed[tab.art0:] = False
    cost2 = np.zeros(tab.n_total)
    cost2[:n] = model.c
    outcome = tab.run(cost2, allowed, max_iterations)
    if outcome == "limit":
        return LpSolution(Status.NUMERICAL_FAILURE, iterations=tab.iterations, phase1_objective=phase1)
    if outcome == "unbounded":
        q, direction = tab.unbounded_column
        ray = np.zeros(tab.n_total)
        ray[q] = direction
        ray[tab.basis] = -direction * tab.T[:, q]
        return LpSolution(Status.UNBOUNDED, certificate=LpCertificate(
            tuple(tab.basis), ray=tuple(float(v) for v in ray[:n])),
            iterations=tab.iterations, phase1_objective=phase1)

    tab.refine()
    values = tab.x[:n].copy()
    # snap nonbasic structurals exactly to their bound
    for q in range(n):
        if not tab.is_basic[q]:
            values[q] = tab.upper[q] if tab.x[q] >= tab.upper[q] else tab.lower[q]
    y = tab.duals(cost2)
    return LpSolution(
        Status.OPTIMAL,
        values=tuple(float(v) for v in values),
        objective_value=float(model.c @ values),
        certificate=LpCertificate(tuple(tab.basis), tuple(float(v) for v in y)),
        iterations=tab.iterations,
        phase1_objective=phase1,
    )


@dataclass(frozen=True)
class CertificateCheck:
    passed: bool
    failures: tuple[tuple[str, str], ...] = ()  # (reason, row or variable label)

    @property
    def reason(self) -> str | None:
        return self.failures[0][0] if self.failures else None


def check_certificate(model: MilpModel, sol: LpSolution, tol: float = TOL) -> CertificateCheck:
    """Verify primal feasibility and LP-duality optimality of ``sol``.

    Uses only the model data, the reported values/objective and the row
    duals in the certificate.
    """
    failures: list[tuple[str, str]] = []
    if sol.status is not Status.OPTIMAL:
        return CertificateCheck(False, (("NotOptimal", sol.status.value),))
    x = np.asarray(sol.values, dtype=float)
    y = np.asarray(sol.certificate.duals, dtype=float)
    if x.shape != (model.n_variables,) or y.shape != (len(model.constraints),):
        return CertificateCheck(False, (("ShapeMismatch", "certificate"),))
    lo, up = np.asarray(model.lower), np.asarray(model.upper)

    for k, v in enumerate(model.variables):
        if x[k] < lo[k] - tol or x[k] > up[k] + tol:
            failures.append(("BoundViolation", v.name))

    lhs = model.A @ x if len(model.constraints) else np.zeros(0)
    for k, c in enumerate(model.constraints):
        gap = lhs[k] - model.b[k]
        if (c.relation is Relation.LE and gap > tol) or (c.relation is Relation.GE and gap < -tol) \
                or (c.relation is Relation.EQ and abs(gap) > tol):
            failures.append(("RowViolation", c.label))

    if sol.objective_value is None or abs(float(model.c @ x) - sol.objective_value) > tol * max(1.0, abs(sol.objective_value)):
        failures.append(("ObjectiveMismatch", "objective"))

    for k, c in enumerate(model.constraints):
        if c.relation is Relation.LE and y[k] > tol:
            failures.append(("DualSign", c.label))
        elif c.relation is Relation.GE and y[k] < -tol:
            failures.append(("DualSign", c.label))
        if c.relation is not Relation.EQ:
            slack = abs(lhs[k] - model.b[k])
            if abs(y[k]) * slack > tol * max(1.0, abs(y[k])):
                failures.append(("ComplementarySlackness", c.label))

    d = model.c - (model.A.T @ y if len(model.constraints) else 0.0)
    for k, v in enumerate(model.variables):
        at_lo = x[k] - lo[k] <= tol
        at_up = up[k] - x[k] <= tol
        if at_lo and at_up:
            continue
        if at_lo and d[k] < -tol:
            failures.append(("ReducedCost", v.name))
        elif at_up and d[k] > tol:
            failures.append(("ReducedCost", v.name))
        elif not at_lo and not at_up and abs(d[k]) > tol:
            failures.append(("ReducedCost", v.name))
    return CertificateCheck(not failures, tuple(failures))
