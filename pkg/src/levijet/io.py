"""Problem files and run reports as versioned JSON with exact rational strings.

Positions in files are 0-based; failure witnesses in reports are 1-based,
matching the library's error messages.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

from flint import fmpq

from .ce_complex import ModuleKind
from .jets import JetBivector, JetDiffeo, JetPoly, JetSpace, JetVectorField
from .levi import LeviProblem, algebroid_to_poisson
from .lie_core import StructureData, StructureError
from .nash_moser import Mode
from .rational import parse_rational, q, qstr
from .schedule import NormFlavor, Variant

FORMAT_VERSION = 1
PROBLEM_FORMAT = "levijet-problem"
REPORT_FORMAT = "levijet-report"
KINDS = ("poisson", "algebroid", "structure")


class ParseError(ValueError):
    """Malformed input; ``line``/``column`` are 1-based like most editors."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 path: str = ""):
        where = f" at line {line} column {column}" if line is not None else ""
        at = f" ({path})" if path else ""
        super().__init__(f"{message}{at}{where}")
        self.message = message
        self.line = line
        self.column = column
        self.path = path

    def as_dict(self) -> dict:
        return {"message": self.message, "path": self.path, "line": self.line, "column": self.column}


# -- jets to and from JSON ------------------------------------------------------------

def poly_to_json(p: JetPoly) -> list:
    """``[[exponents, "p/q"], ...]`` in graded-lex order."""
    return [[list(a), qstr(c)] for a, c in p.items()]


def poly_from_json(space: JetSpace, data) -> JetPoly:
    return space.poly({tuple(a): q(c) for a, c in data})


def bivector_to_json(pi: JetBivector) -> list:
    out = []
    for (i, j) in sorted(pi.comps):
        for a, c in pi(i, j).items():
            out.append([[i, j], list(a), qstr(c)])
    return out


def bivector_from_json(space: JetSpace, data) -> JetBivector:
    comps: dict[tuple, dict] = {}
    for (i, j), a, c in data:
        v = q(c)
        if i > j:
            i, j, v = j, i, -v
        terms = comps.setdefault((i, j), {})
        terms[tuple(a)] = terms.get(tuple(a), fmpq(0)) + v
    return JetBivector(space, {k: space.poly(t) for k, t in comps.items()})


def field_to_json(X) -> list:
    return [poly_to_json(p) for p in X.components]


def field_from_json(space: JetSpace, data) -> JetVectorField:
    return JetVectorField(space, [poly_from_json(space, p) for p in data])


def diffeo_to_json(phi: JetDiffeo) -> list:
    return [poly_to_json(p) for p in phi.components]


def diffeo_from_json(space: JetSpace, data) -> JetDiffeo:
    return JetDiffeo(space, [poly_from_json(space, p) for p in data])


def nested_to_json(arr):
    if isinstance(arr, (list, tuple)):
        return [nested_to_json(v) for v in arr]
    return qstr(arr)


def structure_to_json(data: StructureData) -> dict:
    return {"n": data.n, "m": data.m, "c": nested_to_json(data.c), "a": nested_to_json(data.a)}


def structure_from_json(obj: dict) -> StructureData:
    def conv(arr):
        if isinstance(arr, list):
            return [conv(v) for v in arr]
        return q(arr)
    return StructureData(obj["n"], obj["m"], conv(obj["c"]), conv(obj["a"]))


def jsonable(x):
    """Witnesses and details as plain JSON values; rationals become strings."""
    if isinstance(x, fmpq):
        return qstr(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "value"):
        return x.value
    return str(x)


def dumps(obj) -> str:
    """Canonical rendering: sorted keys, two-space indent, short lists on one line."""
    return _render(obj, 0) + "\n"


def _render(obj, level: int) -> str:
    flat = json.dumps(obj, sort_keys=True, ensure_ascii=False)
    if not isinstance(obj, (dict, list)) or not obj or (len(flat) <= 72 and (
            isinstance(obj, list) or all(not isinstance(v, (dict, list)) for v in obj.values()))):
        return flat
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(obj, list):
        body = ",\n".join(inner + _render(v, level + 1) for v in obj)
        return f"[\n{body}\n{pad}]"
    body = ",\n".join(f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {_render(obj[k], level + 1)}"
                      for k in sorted(obj))
    return f"{{\n{body}\n{pad}}}"


# -- problem file --------------------------------------------------------------------------

@dataclass
class ScheduleOptions:
    t0: fmpq | None = None
    variant: Variant = Variant.MAIN
    tau: fmpq | None = None
    max_steps: int | None = None

    def to_json(self) -> dict:
        return {"t0": None if self.t0 is None else qstr(self.t0), "variant": self.variant.value,
                "tau": None if self.tau is None else qstr(self.tau), "max_steps": self.max_steps}


@dataclass
class AxiomOptions:
    flavor: NormFlavor = NormFlavor.SPECTRAL
    samples: int = 50
    seed: int = 0
    variables: int = 2
    density: fmpq = fmpq(3, 10)

    def to_json(self) -> dict:
        return {"flavor": self.flavor.value, "samples": self.samples, "seed": self.seed,
                "variables": self.variables, "density": qstr(self.density)}


@dataclass
class ProblemFile:
    kind: str
    degree: int
    structure: StructureData | None = None
    bivector: list = field(default_factory=list)          # ((i, j), exponents, rational)
    fiber_dim: int | None = None                          # algebroid: N
    base_dim: int | None = None                           # algebroid: n
    levi_dim: int | None = None                           # algebroid: m
    brackets: list = field(default_factory=list)          # ((i, j, k), base exponents, rational)
    anchor: list = field(default_factory=list)            # ((i, j), base exponents, rational)
    mode: Mode = Mode.FORMAL
    schedule: ScheduleOptions = field(default_factory=ScheduleOptions)
    module: ModuleKind = ModuleKind.FUNCTIONS
    axioms: AxiomOptions = field(default_factory=AxiomOptions)
    version: int = FORMAT_VERSION

    @property
    def n(self) -> int:
        if self.kind == "algebroid":
            return self.fiber_dim + self.base_dim
        return self.structure.n

    def to_json(self) -> dict:
        out = {"format": PROBLEM_FORMAT, "version": self.version, "kind": self.kind,
               "degree": self.degree, "mode": self.mode.value, "schedule": self.schedule.to_json()}
        if self.kind == "algebroid":
            out.update({"N": self.fiber_dim, "n": self.base_dim, "m": self.levi_dim,
                        "brackets": [[list(idx), list(a), qstr(c)] for idx, a, c in self.brackets],
                        "anchor": [[list(idx), list(a), qstr(c)] for idx, a, c in self.anchor]})
        else:
            out["structure"] = structure_to_json(self.structure)
        if self.kind == "poisson":
            out["bivector"] = [[list(idx), list(a), qstr(c)] for idx, a, c in self.bivector]
        if self.kind == "structure":
            out["module"] = self.module.value
            out["axioms"] = self.axioms.to_json()
        return out

    def with_degree(self, degree: int | None) -> "ProblemFile":
        if degree is None or degree == self.degree:
            return self
        if degree < 2:
            raise ParseError("degree must be at least 2", path="degree")
        return replace(self, degree=degree)

    def space(self) -> JetSpace:
        return JetSpace(self.n, self.degree)

    def bivector_jet(self) -> JetBivector:
        return bivector_from_json(self.space(), self.bivector)

    def problem(self, check: bool = False) -> LeviProblem:
        if self.kind == "poisson":
            return LeviProblem(self.structure, self.bivector_jet(), check=check)
        if self.kind == "algebroid":
            N, n = self.fiber_dim, self.base_dim
            brackets = [[[{} for _ in range(N)] for _ in range(N)] for _ in range(N)]
            anchor = [[{} for _ in range(n)] for _ in range(N)]
            for (i, j, k), a, c in self.brackets:
                for (u, v, s) in ((i, j, c), (j, i, -c)):
                    t = brackets[u][v][k]
                    t[tuple(a)] = t.get(tuple(a), fmpq(0)) + s
            for (i, j), a, c in self.anchor:
                anchor[i][j][tuple(a)] = anchor[i][j].get(tuple(a), fmpq(0)) + c
            return algebroid_to_poisson(N, n, self.levi_dim, brackets, anchor, self.degree, check=check)
        raise ParseError(f"a {self.kind!r} file carries no bivector", path="kind")


class _Reader:
    """Walks decoded JSON, turning failures into positioned parse errors."""

    def __init__(self, text: str):
        self.text = text

    def locate(self, token) -> tuple[int | None, int | None]:
        if token is None:
            return None, None
        needle = json.dumps(token)
        pos = self.text.find(needle)
        if pos < 0:
            return None, None
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, message, path, token=None):
        line, col = self.locate(token)
        raise ParseError(message, line, col, path)

    def get(self, obj, key, path, kind=None, default=...):
        if not isinstance(obj, dict):
            self.fail("expected an object", path)
        if key not in obj:
            if default is not ...:
                return default
            self.fail(f"missing field {key!r}", path)
        v = obj[key]
        if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
            self.fail(f"field {key!r} must be an integer", f"{path}.{key}", v)
        return v

    def rational(self, v, path) -> fmpq:
        if not isinstance(v, str):
            self.fail("rationals must be strings like \"-3/4\"", path, v)
        try:
            return parse_rational(v)
        except ValueError:
            self.fail(f"malformed rational {v!r}", path, v)

    def opt_rational(self, v, path):
        return None if v is None else self.rational(v, path)

    def nested(self, arr, shape, path):
        if not shape:
            return self.rational(arr, path)
        if not isinstance(arr, list) or len(arr) != shape[0]:
            self.fail(f"expected a list of length {shape[0]}", path)
        return [self.nested(v, shape[1:], f"{path}[{i}]") for i, v in enumerate(arr)]

    def terms(self, data, path, index_len, index_bounds, nvars):
        if not isinstance(data, list):
            self.fail("expected a list of terms", path)
        out = []
        for t, entry in enumerate(data):
            p = f"{path}[{t}]"
            if not isinstance(entry, list) or len(entry) != 3:
                self.fail("term must be [indices, exponents, rational]", p)
            idx, alpha, c = entry
            if not isinstance(idx, list) or len(idx) != index_len or \
                    not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
                self.fail(f"indices must be {index_len} integers", p)
            for i, bound in zip(idx, index_bounds):
                if not 0 <= i < bound:
                    self.fail(f"index {i} out of range 0..{bound - 1}", p)
            if not isinstance(alpha, list) or len(alpha) != nvars or \
                    not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in alpha):
                self.fail(f"exponent vector must have {nvars} non-negative integers", p)
            out.append((tuple(idx), tuple(alpha), self.rational(c, f"{p}[2]")))
        return out


def parse_problem(text: str) -> ProblemFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    rd = _Reader(text)
    if not isinstance(obj, dict):
        rd.fail("top level must be an object", "")
    fmt = obj.get("format", PROBLEM_FORMAT)
    if fmt != PROBLEM_FORMAT:
        rd.fail(f"unknown format {fmt!r}", "format", fmt)
    version = rd.get(obj, "version", "", int, FORMAT_VERSION)
    if version != FORMAT_VERSION:
        rd.fail(f"unsupported version {version}", "version")
    kind = rd.get(obj, "kind", "", default="poisson")
    if kind not in KINDS:
        rd.fail(f"kind must be one of {KINDS}", "kind", kind)
    degree = rd.get(obj, "degree", "", int)
    if degree < 2:
        rd.fail("degree must be at least 2", "degree")
    try:
        mode = Mode(rd.get(obj, "mode", "", default="formal"))
    except ValueError:
        rd.fail("mode must be formal or scheduled", "mode", obj.get("mode"))
    sched = rd.get(obj, "schedule", "", default={}) or {}
    try:
        variant = Variant(sched.get("variant", "main"))
    except ValueError:
        rd.fail("variant must be main or appendix", "schedule.variant", sched.get("variant"))
    max_steps = sched.get("max_steps")
    if max_steps is not None and (not isinstance(max_steps, int) or max_steps < 0):
        rd.fail("max_steps must be a non-negative integer", "schedule.max_steps")
    options = ScheduleOptions(rd.opt_rational(sched.get("t0"), "schedule.t0"), variant,
                              rd.opt_rational(sched.get("tau"), "schedule.tau"), max_steps)
    pf = ProblemFile(kind, degree, mode=mode, schedule=options, version=version)

    if kind == "algebroid":
        N = rd.get(obj, "N", "", int)
        n = rd.get(obj, "n", "", int)
        m = rd.get(obj, "m", "", int)
        if N < 1 or n < 1 or not 1 <= m <= N:
            rd.fail("need N >= 1, n >= 1 and 1 <= m <= N", "")
        pf.fiber_dim, pf.base_dim, pf.levi_dim = N, n, m
        pf.brackets = rd.terms(rd.get(obj, "brackets", ""), "brackets", 3, (N, N, N), n)
        pf.anchor = rd.terms(rd.get(obj, "anchor", "", default=[]), "anchor", 2, (N, n), n)
        return pf

    st = rd.get(obj, "structure", "")
    n = rd.get(st, "n", "structure", int)
    m = rd.get(st, "m", "structure", int)
    if not 1 <= m <= n:
        rd.fail("need 1 <= m <= n", "structure")
    c = rd.nested(rd.get(st, "c", "structure"), (m, m, m), "structure.c")
    a = rd.nested(rd.get(st, "a", "structure", default=[[] for _ in range(m)] if n == m else ...),
                  (m, n - m, n - m), "structure.a")
    try:
        pf.structure = StructureData(n, m, c, a)
    except StructureError as exc:
        rd.fail(str(exc), "structure")
    if kind == "poisson":
        pf.bivector = rd.terms(rd.get(obj, "bivector", ""), "bivector", 2, (n, n), n)
        for t, (idx, _, _) in enumerate(pf.bivector):
            if idx[0] == idx[1]:
                rd.fail("diagonal bivector component", f"bivector[{t}]")
    else:
        try:
            pf.module = ModuleKind(rd.get(obj, "module", "", default="functions"))
        except ValueError:
            rd.fail("unknown module kind", "module", obj.get("module"))
        ax = rd.get(obj, "axioms", "", default={}) or {}
        try:
            flavor = NormFlavor(ax.get("flavor", "spectral"))
        except ValueError:
            rd.fail("flavor must be spectral or majorant", "axioms.flavor", ax.get("flavor"))
        pf.axioms = AxiomOptions(flavor, int(ax.get("samples", 50)), int(ax.get("seed", 0)),
                                 int(ax.get("variables", 2)),
                                 rd.rational(ax.get("density", "3/10"), "axioms.density"))
    return pf


def load_problem(path) -> tuple[ProblemFile, str]:
    """Parse a problem file; also returns the sha256 of its bytes."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc.reason}") from None
    return parse_problem(text), hashlib.sha256(raw).hexdigest()


def problem_from_bivector(data: StructureData, pi: JetBivector, **kw) -> ProblemFile:
    terms = [((i, j), a, c) for (i, j) in sorted(pi.comps) for a, c in pi(i, j).items()]
    return ProblemFile("poisson", pi.space.cap, structure=data, bivector=terms, **kw)


def problem_from_algebroid(N: int, n: int, m: int, pi: JetBivector, **kw) -> ProblemFile:
    """Read brackets and anchor back off a fiber-wise linear bivector on ``(e, x)``."""
    brackets, anchor = [], []
    for (i, j) in sorted(pi.comps):
        p = pi(i, j)
        for a, c in p.items():
            if j < N:
                k = next(t for t in range(N) if a[t])
                brackets.append(((i, j, k), a[N:], c))
            elif i < N:
                anchor.append(((i, j - N), a[N:], c))
    return ProblemFile("algebroid", pi.space.cap, fiber_dim=N, base_dim=n, levi_dim=m,
                       brackets=brackets, anchor=anchor, **kw)


# -- reports -------------------------------------------------------------------------------

def tool_version() -> str:
    from . import __version__
    return __version__


@dataclass
class RunReport:
    command: str
    passed: bool
    input: dict | None = None
    input_sha256: str | None = None
    sections: dict[str, Any] = field(default_factory=dict)
    timing: dict[str, float] | None = None

    def to_json(self) -> dict:
        out = {"format": REPORT_FORMAT, "version": FORMAT_VERSION,
               "tool": {"name": "levijet", "version": tool_version()},
               "command": self.command, "passed": self.passed,
               "input": self.input, "input_sha256": self.input_sha256}
        out.update(jsonable(self.sections))
        if self.timing is not None:
            out["timing_ms_approx"] = {k: round(v, 3) for k, v in self.timing.items()}
        return out

    def dumps(self) -> str:
        return dumps(self.to_json())


def checks_block(checks: Sequence) -> list[dict]:
    """Uniform ``{name, passed, witness}`` entries."""
    out = []
    for c in checks:
        entry = {"name": c.name, "passed": bool(c.passed), "witness": jsonable(c.witness)}
        if getattr(c, "detail", ""):
            entry["detail"] = c.detail
        out.append(entry)
    return out
