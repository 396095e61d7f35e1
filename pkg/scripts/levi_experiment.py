"""Levi normal form for perturbations of the linear (so(3) x| R^3)* structure."""
import argparse
import time

from levijet.levi import normalize, perturbed_problem, yy_nonlinear
from levijet.lie_core import so3_semidirect_r3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=6)
    ap.add_argument("--seeds", type=int, default=1)
    ap.add_argument("--density", type=float, default=0.3)
    args = ap.parse_args()
    data = so3_semidirect_r3()
    for seed in range(args.seeds):
        problem, _ = perturbed_problem(data, args.degree, seed=seed, density=args.density)
        t = time.perf_counter()
        res = normalize(problem)
        dt = time.perf_counter() - t
        print(f"seed {seed}: {res.status.value} in {len(res.steps)} steps ({dt:.1f}s), orders {res.log.orders}")
        for name, ok in res.relations.items():
            print(f"    {name}: {ok}")
        print(f"    y-y brackets nonlinear: {yy_nonlinear(problem, res.pi)}")


if __name__ == "__main__":
    main()
