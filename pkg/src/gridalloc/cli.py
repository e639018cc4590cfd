"""Command-line entry point: ``solve``, ``validate`` and ``oracle``.

Exit codes: 0 optimal/feasible, 2 infeasible (or violations), 3 input
error, 4 search limit reached.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction

from .branch_bound import AllocationConsistencyError, extract_allocation, greedy_allocate, solve_milp
from .core import (Allocation, InstanceDefectError, InstanceParseError, allocation_to_data,
                   instance_to_data, json_number, load_instance, parse_allocation)
from .formulation import Mode, Status, build_milp, lp_relaxation
from .oracle import INFEASIBLE, LIMIT_EXCEEDED, OracleLimits, cost_lower_bound, oracle_solve, random_instance
from .report import render, solve_document, solver_number, validate_document
from .simplex import solve_lp
from .validator import evaluate

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3
EXIT_LIMIT = 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    instance_path: str | None = None
    allocation_path: str | None = None
    method: str = "bnb"
    mode: str = "integer"
    strict_eq6: bool = False
    output_path: str | None = None
    seed: int | None = None
    max_units: int = OracleLimits().max_total_units
    node_limit: int = 50_000

    def __post_init__(self):
        if (self.command == "validate") != (self.allocation_path is not None):
            raise ValueError("allocation_path is required exactly for the validate command")


class InputError(Exception):
    pass


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise InputError(f"cannot read instance {path}: {exc.strerror or exc}") from None
    except (InstanceParseError, InstanceDefectError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _emit(cfg: RunConfig, doc: dict) -> None:
    text = render(doc)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_solve(cfg: RunConfig) -> int:
    inst = _load(cfg.instance_path)
    mode = Mode(cfg.mode)
    integer = mode is Mode.INTEGER
    model = build_milp(inst, mode, strict_eq6=cfg.strict_eq6)
    search = None
    alloc = None
    objective = None

    if cfg.method == "bnb":
        seed = greedy_allocate(inst)
        sol, stats = solve_milp(model, incumbent=seed, node_limit=cfg.node_limit)
        search = {
            "nodes_explored": stats.nodes_explored,
            "incumbent_updates": stats.incumbent_updates,
            "best_bound": solver_number(stats.best_bound),
            "proven_optimal": stats.proven_optimal,
        }
        status = sol.status.value
        if sol.status is Status.OPTIMAL:
            alloc = extract_allocation(sol, inst, integral=integer)
            objective = sol.objective_value
    elif cfg.method == "greedy":
        alloc = greedy_allocate(inst)
        if alloc is not None and cfg.strict_eq6 and not evaluate(inst, alloc, strict_eq6=True).feasible:
            alloc = None
        status = "Feasible" if alloc is not None else "Failure"
    elif cfg.method == "lp-relax":
        sol = solve_lp(lp_relaxation(model))
        status = sol.status.value
        if sol.status is Status.OPTIMAL:
            objective = sol.objective_value
            n = inst.n_processors
            alloc = Allocation(tuple(
                tuple(Fraction(v).limit_denominator(10**6) for v in sol.values[i * n:(i + 1) * n])
                for i in range(inst.n_sources)
            ))
            integer = False
    else:
        raise InputError(f"unknown method {cfg.method!r}")

    feasibility = None
    if alloc is not None:
        feasibility = evaluate(inst, alloc, integer=integer, strict_eq6=cfg.strict_eq6)
        if objective is None:
            objective = feasibility.total_cost
    doc = solve_document(
        inst=inst, method=cfg.method, mode=mode.value, strict_eq6=cfg.strict_eq6,
        status=status, objective=objective, allocation=alloc, feasibility=feasibility,
        search=search, lower_bound=cost_lower_bound(inst),
    )
    _emit(cfg, doc)
    if search is not None and not search["proven_optimal"] and status != Status.INFEASIBLE.value:
        return EXIT_LIMIT
    if alloc is not None:
        return EXIT_OK
    if status in (Status.NUMERICAL_FAILURE.value, Status.NODE_LIMIT.value):
        return EXIT_LIMIT
    return EXIT_INFEASIBLE


def run_validate(cfg: RunConfig) -> int:
    inst = _load(cfg.instance_path)
    try:
        with open(cfg.allocation_path, encoding="utf-8") as fh:
            alloc = parse_allocation(fh.read(), inst)
    except OSError as exc:
        raise InputError(f"cannot read allocation {cfg.allocation_path}: {exc.strerror or exc}") from None
    except InstanceParseError as exc:
        raise InputError(f"{cfg.allocation_path}: {exc}") from None
    report = evaluate(inst, alloc, integer=cfg.mode == Mode.INTEGER.value, strict_eq6=cfg.strict_eq6)
    _emit(cfg, validate_document(report, inst, cfg.strict_eq6))
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def run_oracle(cfg: RunConfig) -> int:
    if cfg.instance_path is not None:
        inst = _load(cfg.instance_path)
    elif cfg.seed is not None:
        inst = random_instance(cfg.seed)
    else:
        raise InputError("oracle needs an instance file or --seed")
    result = oracle_solve(inst, OracleLimits(max_total_units=cfg.max_units))
    doc = {
        "command": "oracle",
        "seed": cfg.seed,
        "instance": instance_to_data(inst) if cfg.instance_path is None else None,
        "status": result.status,
        "objective": None if result.objective is None else json_number(result.objective),
        "allocation": None if result.allocation is None else allocation_to_data(result.allocation, inst),
        "nodes": result.nodes,
        "reason": result.reason or None,
    }
    _emit(cfg, doc)
    if result.status == LIMIT_EXCEEDED:
        return EXIT_LIMIT
    if result.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridalloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize total cost for an instance")
    p.add_argument("instance")
    p.add_argument("--method", choices=["bnb", "greedy", "lp-relax"], default="bnb")
    p.add_argument("--mode", choices=["integer", "continuous"], default="integer")
    p.add_argument("--strict-eq6", action="store_true",
                   help="allow each processor to serve at most one source")
    p.add_argument("--node-limit", type=int, default=50_000)
    p.add_argument("--out")

    p = sub.add_parser("validate", help="replay an allocation against an instance")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--strict-eq6", action="store_true")
    p.add_argument("--mode", choices=["integer", "continuous"], default="integer")
    p.add_argument("--out")

    p = sub.add_parser("oracle", help="exhaustive optimum for a small instance")
    p.add_argument("instance", nargs="?")
    p.add_argument("--max-units", type=int, default=OracleLimits().max_total_units)
    p.add_argument("--seed", type=int, help="generate a random instance from this seed")
    p.add_argument("--out")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        instance_path=args.instance,
        allocation_path=getattr(args, "allocation", None),
        method=getattr(args, "method", "bnb"),
        mode=getattr(args, "mode", "integer"),
        strict_eq6=getattr(args, "strict_eq6", False),
        output_path=args.out,
        seed=getattr(args, "seed", None),
        max_units=getattr(args, "max_units", OracleLimits().max_total_units),
        node_limit=getattr(args, "node_limit", 50_000),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    runner = {"solve": run_solve, "validate": run_validate, "oracle": run_oracle}[cfg.command]
    try:
        return runner(cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AllocationConsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
