"""Write the example problem files used in the README into a directory."""
import argparse
from pathlib import Path

from levijet.io import ProblemFile, ScheduleOptions, dumps, problem_from_algebroid, problem_from_bivector
from levijet.levi import perturbed_algebroid, perturbed_problem
from levijet.lie_core import so3, so3_semidirect_r3
from levijet.nash_moser import Mode
from flint import fmpq


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", nargs="?", default="problems")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    conn, _ = perturbed_problem(so3(), 8, seed=args.seed)
    levi, _ = perturbed_problem(so3_semidirect_r3(), 6, seed=args.seed)
    alg, _ = perturbed_algebroid(so3(), 5, seed=args.seed)
    files = {
        "conn_so3_d8.json": problem_from_bivector(conn.data, conn.pi),
        "conn_so3_d8_scheduled.json": problem_from_bivector(
            conn.data, conn.pi, mode=Mode.SCHEDULED, schedule=ScheduleOptions(t0=fmpq(16))),
        "levi_semidirect_d6.json": problem_from_bivector(levi.data, levi.pi),
        "algebroid_so3_d5.json": problem_from_algebroid(3, 3, 3, alg.pi),
        "so3_structure_d6.json": ProblemFile("structure", 6, structure=so3()),
    }
    for name, pf in files.items():
        (out / name).write_text(dumps(pf.to_json()))
        print(out / name)


if __name__ == "__main__":
    main()
