"""Command line entry point: ``levijet <command> [options]``.

Every command writes one JSON report (stdout or ``--output``) and exits 0
exactly when the checks it stands for pass.  Exit code 2 means the input
could not be parsed.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from .ce_complex import HomotopyTables, ModuleSpec, cohomology_table, verify_homotopy_identity
from .io import (ParseError, ProblemFile, RunReport, bivector_to_json, checks_block,
                 diffeo_to_json, load_problem)
from .jets import JetSpace, schouten_jacobiator
from .levi import (NormalizeConfig, ProblemError, check_fiberwise_linear, model_component,
                   normalize, yy_nonlinear)
from .lie_core import Check, validate_structure
from .nash_moser import Mode, audit_schedule
from .rational import parse_rational, qstr
from .schedule import check_sci_axioms, plan_constants, random_jet, schedule, validate_constants

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.marks: dict[str, float] = {}
        self._start = time.perf_counter()

    def mark(self, name):
        now = time.perf_counter()
        self.marks[name] = (now - self._start) * 1000
        self._start = now

    def result(self):
        return self.marks if self.enabled else None


# -- validation -------------------------------------------------------------------------

def problem_checks(pf: ProblemFile) -> list[Check]:
    """Structure constants, vanishing at the origin, linear part, Jacobi, fiber-wise linearity."""
    try:
        problem = pf.problem(check=False)
    except ProblemError as exc:
        return [Check("input consistency", False, exc.witness, str(exc))]
    data, pi, sp = problem.data, problem.pi, problem.space
    checks = list(validate_structure(data).checks)

    witness = next(((i + 1, j + 1) for (i, j), p in sorted(pi.comps.items()) if p.constant_term() != 0), None)
    checks.append(Check("vanishes at origin", witness is None, witness))

    witness = None
    for i in range(data.m):
        for j in range(i + 1, data.n):
            if pi(i, j).linear_part() != model_component(data, sp, i, j):
                witness = (i + 1, j + 1)
                break
        if witness:
            break
    checks.append(Check("linear part matches structure constants", witness is None, witness))

    wit = schouten_jacobiator(pi).truncate(sp.cap - 1).witness()
    if wit is None:
        checks.append(Check("jacobiator vanishes mod truncation", True))
    else:
        (i, j, k), alpha, c = wit
        checks.append(Check("jacobiator vanishes mod truncation", False,
                            {"component": (i + 1, j + 1, k + 1), "monomial": list(alpha), "coefficient": c}))
    if problem.is_algebroid:
        checks.append(Check("fiber-wise linear", check_fiberwise_linear(pi, problem.fiber)))
    return checks


def cmd_validate(pf: ProblemFile, args) -> RunReport:
    if pf.kind == "structure":
        checks = validate_structure(pf.structure).checks
    else:
        checks = problem_checks(pf)
    block = checks_block(checks)
    return RunReport("validate", all(c["passed"] for c in block), sections={"validation": block})


# -- normalization -------------------------------------------------------------------------

def _normalize(pf: ProblemFile, args, command: str, clock: _Clock) -> RunReport:
    block = checks_block(problem_checks(pf))
    clock.mark("validate")
    if not all(c["passed"] for c in block):
        return RunReport(command, False, sections={"validation": block})
    problem = pf.problem(check=False)
    mode = Mode(args.mode or pf.mode.value)
    opts = pf.schedule
    variant = args.variant or opts.variant.value
    tau = parse_rational(args.tau) if args.tau is not None else opts.tau
    if variant == "appendix" and tau is None:
        tau = parse_rational("0")
    constants = plan_constants(problem.data.n, variant, tau)
    t0 = parse_rational(args.t0) if args.t0 is not None else opts.t0
    if mode is Mode.SCHEDULED and t0 is None:
        raise ParseError("scheduled mode needs t0 (--t0 or schedule.t0)", path="schedule.t0")
    max_steps = args.max_steps if args.max_steps is not None else opts.max_steps
    config = NormalizeConfig(mode=mode, max_steps=max_steps, t0=t0, constants=constants, strict=False)
    result = normalize(problem, config)
    clock.mark("normalize")
    step_checks = result.log.all_checks()
    steps = [rec.as_dict(timing=clock.enabled) for rec in result.log.steps]
    sections = {
        "validation": block,
        "mode": mode.value,
        "constants": constants.as_dict(),
        "status": result.status.value,
        "order_sequence": [("inf" if o == float("inf") else int(o)) for o in result.log.orders],
        "steps": steps,
        "step_checks": step_checks,
        "final_norms": {k: qstr(v) for k, v in result.log.final_norms.items()},
        "relations": result.relations,
        "yy_nonlinear": yy_nonlinear(problem, result.pi),
        "result": {"bivector": bivector_to_json(result.pi), "transform": diffeo_to_json(result.theta)},
    }
    if mode is Mode.SCHEDULED:
        sections["t0"] = qstr(t0)
        sections["audit"] = audit_schedule(result.log, constants, t0).as_dict()
        clock.mark("audit")
    passed = result.converged and all(result.relations.values()) and all(step_checks.values())
    return RunReport(command, passed, sections=sections)


def cmd_normalize(pf: ProblemFile, args, clock) -> RunReport:
    if pf.kind != "poisson":
        raise ParseError("normalize expects a poisson problem file", path="kind")
    return _normalize(pf, args, "normalize", clock)


def cmd_algebroid(pf: ProblemFile, args, clock) -> RunReport:
    if pf.kind != "algebroid":
        raise ParseError("algebroid expects an algebroid problem file", path="kind")
    return _normalize(pf, args, "algebroid", clock)


# -- cohomology, schedule, axioms ----------------------------------------------------------

def cmd_cohomology(pf: ProblemFile, args, clock) -> RunReport:
    if pf.structure is None:
        raise ParseError("cohomology needs structure constants", path="structure")
    structure = validate_structure(pf.structure)
    if not structure.passed:
        return RunReport("cohomology", False, sections={"validation": checks_block(structure.checks)})
    spec = ModuleSpec(pf.structure, pf.module, pf.degree)
    tables = HomotopyTables(spec)
    clock.mark("tables")
    rep = verify_homotopy_identity(tables, spec, samples=args.samples or 0, seed=args.seed)
    clock.mark("identity")
    matrix = {str(d): {str(j): ok for j, ok in sorted(row.items())}
              for d, row in sorted(rep.by_degree().items())}
    rows = [{"degree": r.degree, "cochain_dims": r.dims, "differential_ranks": r.ranks,
             "invariants": r.invariants, "cohomology": r.cohomology}
            for r in cohomology_table(spec, tables)]
    failures = [{"component": c.component, "degree": c.degree, "cochain_degree": c.cochain_degree,
                 "witness": c.witness} for c in rep.failures()][:10]
    sections = {"validation": checks_block(structure.checks), "module": pf.module.value,
                "identity_by_degree": matrix, "random_samples": len(rep.sample_checks),
                "cohomology": rows, "failures": failures}
    return RunReport("cohomology", rep.passed, sections=sections)


def cmd_schedule(args) -> RunReport:
    if args.n is None:
        raise ParseError("schedule needs --n")
    variant = args.variant or "main"
    tau = parse_rational(args.tau) if args.tau is not None else (parse_rational("0") if variant == "appendix" else None)
    constants = plan_constants(args.n, variant, tau)
    bad = validate_constants(constants)
    sections = {"constants": constants.as_dict(), "violations": bad}
    if args.t0 is not None:
        seq = schedule(parse_rational(args.t0), args.max_steps if args.max_steps is not None else 6)
        sections["t0"] = qstr(seq.t0)
        sections["schedule"] = [e.as_dict() for e in seq.entries]
        sections["t0_flagged_steps"] = seq.flagged
    return RunReport("schedule", not bad, sections=sections)


def cmd_axioms(pf: ProblemFile, args, clock) -> RunReport:
    ax = pf.axioms
    sp = JetSpace(ax.variables, pf.degree)
    rng = random.Random(ax.seed)
    samples = args.samples if args.samples else ax.samples
    jets = [random_jet(sp, rng, float(ax.density)) for _ in range(samples)]
    rep = check_sci_axioms(ax.flavor, jets)
    clock.mark("axioms")
    results = [{"axiom": r.name, "passed": r.passed, "cases": r.cases,
                "worst_ratio_approx": f"{r.worst_ratio:.12g}", "witness": r.witness}
               for r in rep.results]
    return RunReport("axioms", rep.passed, sections={"flavor": ax.flavor.value, "samples": samples,
                                                    "results": results})


# -- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levijet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--timing", action="store_true", help="add wall-clock timings (breaks byte-identity)")
    with_input = argparse.ArgumentParser(add_help=False)
    with_input.add_argument("--input", required=True, help="problem file (JSON)")
    with_input.add_argument("--degree", type=int, help="override the truncation degree D")
    run_opts = argparse.ArgumentParser(add_help=False)
    run_opts.add_argument("--mode", choices=["formal", "scheduled"])
    run_opts.add_argument("--t0", help="initial smoothing parameter, a rational > 1")
    run_opts.add_argument("--max-steps", type=int)
    run_opts.add_argument("--variant", choices=["main", "appendix"])
    run_opts.add_argument("--tau", help="appendix-variant tau, a rational >= 0")

    sub.add_parser("validate", parents=[common, with_input], help="check a problem file")
    sub.add_parser("normalize", parents=[common, with_input, run_opts], help="Levi-normalize a Poisson jet")
    sub.add_parser("algebroid", parents=[common, with_input, run_opts], help="normalize a Lie algebroid")
    p = sub.add_parser("cohomology", parents=[common, with_input], help="verify the CE homotopy identity")
    p.add_argument("--samples", type=int, default=0, help="extra random cochains checked on jets")
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("schedule", parents=[common], help="schedule constants and smoothing sequence")
    p.add_argument("--n", type=int)
    p.add_argument("--variant", choices=["main", "appendix"])
    p.add_argument("--tau")
    p.add_argument("--t0")
    p.add_argument("--max-steps", type=int, help="last step index of the printed schedule")
    p = sub.add_parser("axioms", parents=[common, with_input], help="audit the norm and smoothing axioms")
    p.add_argument("--samples", type=int)
    return parser


def execute(args) -> tuple[RunReport, int]:
    clock = _Clock(args.timing)
    if args.command == "schedule":
        report = cmd_schedule(args)
    else:
        pf, digest = load_problem(args.input)
        pf = pf.with_degree(args.degree)
        clock.mark("parse")
        handlers = {"validate": lambda: cmd_validate(pf, args), "normalize": lambda: cmd_normalize(pf, args, clock),
                    "algebroid": lambda: cmd_algebroid(pf, args, clock),
                    "cohomology": lambda: cmd_cohomology(pf, args, clock),
                    "axioms": lambda: cmd_axioms(pf, args, clock)}
        report = handlers[args.command]()
        report.input = pf.to_json()
        report.input_sha256 = digest
    report.timing = clock.result()
    return report, EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = execute(args)
        text = report.dumps()
    except ParseError as exc:
        text = RunReport(args.command, False, sections={"error": exc.as_dict()}).dumps()
        code = EXIT_INPUT
    except (ValueError, ProblemError) as exc:
        text = RunReport(args.command, False, sections={"error": {"message": str(exc)}}).dumps()
        code = EXIT_INPUT
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
