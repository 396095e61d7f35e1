"""Normalize perturbed transformation algebroids of so(3) acting on R^3."""
import argparse

from levijet.levi import CHECK_FIBERWISE, normalize, perturbed_algebroid
from levijet.lie_core import so3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=5)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    for seed in range(args.seeds):
        problem, _ = perturbed_algebroid(so3(), args.degree, seed=seed)
        res = normalize(problem)
        fiberwise = [s.checks[CHECK_FIBERWISE] for s in res.steps]
        print(f"seed {seed}: {res.status.value}, orders {res.log.orders}, "
              f"fiber-wise linear per step {fiberwise}, relations {all(res.relations.values())}")


if __name__ == "__main__":
    main()
