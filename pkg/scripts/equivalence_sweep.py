"""Compare branch-and-bound against the exhaustive oracle on seeded random instances."""
import argparse
import time

from gridalloc.branch_bound import solve_milp
from gridalloc.formulation import Mode, Status, build_milp
from gridalloc.oracle import OPTIMAL, oracle_solve, random_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--mode", choices=[m.value for m in Mode], default="integer")
    args = ap.parse_args()

    t0 = time.perf_counter()
    feasible = mismatches = 0
    for seed in range(args.start, args.start + args.count):
        inst = random_instance(seed)
        ref = oracle_solve(inst)
        sol, _ = solve_milp(build_milp(inst, Mode(args.mode)))
        ok = (ref.status == OPTIMAL) == (sol.status is Status.OPTIMAL)
        if ok and ref.status == OPTIMAL:
            feasible += 1
            # the oracle is integral, so in continuous mode it is only an upper bound
            ok = (sol.objective_value == ref.objective if args.mode == "integer"
                  else sol.objective_value <= ref.objective + 1e-9)
        if not ok:
            mismatches += 1
            print(f"seed {seed}: oracle {ref.status} {ref.objective}, "
                  f"bnb {sol.status.value} {sol.objective_value}")
    print(f"{args.count} instances from seed {args.start}: {feasible} feasible, "
          f"{mismatches} mismatches, {time.perf_counter() - t0:.1f} s")
    raise SystemExit(1 if mismatches else 0)


if __name__ == "__main__":
    main()
