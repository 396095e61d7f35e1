"""Tabulate schedule constants for n = 1..N and audit one scheduled run."""
import argparse

from flint import fmpq

from levijet.levi import NormalizeConfig, normalize, perturbed_problem
from levijet.lie_core import so3
from levijet.nash_moser import Mode, audit_schedule
from levijet.schedule import Variant, approx_str, plan_constants, validate_constants


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=12)
    ap.add_argument("--tau", default="1")
    ap.add_argument("--t0", default="16")
    args = ap.parse_args()
    print(f"{'variant':>8} {'n':>3} {'s':>3} {'A':>4} {'epsilon':>12} {'l':>7} {'L':>7}  valid")
    for variant in Variant:
        tau = fmpq(args.tau) if variant is Variant.APPENDIX else None
        for n in range(1, args.max_n + 1):
            c = plan_constants(n, variant, tau)
            ok = not validate_constants(c)
            print(f"{variant.value:>8} {n:>3} {c.s:>3} {c.A:>4} {str(c.epsilon):>12} {c.l:>7} {c.L:>7}  {ok}")

    problem, _ = perturbed_problem(so3(), 8, seed=0)
    res = normalize(problem, NormalizeConfig(mode=Mode.SCHEDULED, t0=fmpq(args.t0)))
    audit = audit_schedule(res.log, plan_constants(3), t0=fmpq(args.t0))
    print(f"\nscheduled run t0={args.t0}: {res.status.value}, orders {res.log.orders}")
    for line in audit.lines:
        print(f"  step {line.step} {line.name:<30} {approx_str(line.value):>14}  "
              f"{'ok' if line.passed else 'violated'}")
    lo, hi = audit.t0_range
    print(f"  admissible t0 range from measured norms: [{lo:.4g}, {hi:.4g}]")
    print(f"  {audit.note}")


if __name__ == "__main__":
    main()
