"""Normalize perturbed linear so(3) Poisson structures and tabulate the runs."""
import argparse
import time

from flint import fmpq

from levijet.levi import NormalizeConfig, linear_model, normalize, perturbed_problem
from levijet.lie_core import so3
from levijet.nash_moser import Mode


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=8)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--mode", choices=["formal", "scheduled"], default="formal")
    ap.add_argument("--t0", default="16")
    args = ap.parse_args()
    cfg = NormalizeConfig(mode=Mode(args.mode), t0=fmpq(args.t0) if args.mode == "scheduled" else None)
    print(f"{'seed':>4}  {'steps':>5}  {'linear':>6}  {'checks':>6}  {'sec':>6}  orders")
    for seed in range(args.seeds):
        problem, _ = perturbed_problem(so3(), args.degree, seed=seed)
        t = time.perf_counter()
        res = normalize(problem, cfg)
        dt = time.perf_counter() - t
        linear = res.pi == linear_model(so3(), problem.space)
        checks = all(res.log.all_checks().values())
        print(f"{seed:>4}  {len(res.steps):>5}  {str(linear):>6}  {str(checks):>6}  {dt:6.2f}  {res.log.orders}")


if __name__ == "__main__":
    main()
