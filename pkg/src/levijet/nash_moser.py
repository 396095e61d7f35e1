"""Generic normal-form iteration ``f_{d+1} = Phi_{f_d} . f_d`` with an exact audit trail.

The driver knows nothing about Poisson structures.  An instance supplies the
projection onto normal forms, the error map, a solver producing a near-identity
transformation from the current element, the action and composition.
"""

from __future__ import annotations

import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from flint import fmpq

from .rational import qstr
from .schedule import (ScheduleConstants, approx_str, SmoothingParameter, log_rational, majorant_norm,
                       radius, spectral_norm)


class Mode(str, Enum):
    FORMAL = "formal"
    SCHEDULED = "scheduled"


class Status(str, Enum):
    CONVERGED = "converged"
    UNCONVERGED = "unconverged"


class SolverFailure(RuntimeError):
    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot


@dataclass
class StepOutcome:
    """What a solver hands back: the transformation and, optionally, the acted element."""
    transform: Any
    displacement: Any
    next_element: Any = None
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)


class SCIInstance(ABC):
    """Capabilities the iteration needs; every callback must be pure."""

    #: loss-of-smoothness offset of the action, kept as metadata only
    action_offset: int = 0

    @abstractmethod
    def project(self, f): ...

    @abstractmethod
    def error(self, f):
        """``f - project(f)``."""

    @abstractmethod
    def error_order(self, f) -> int | float: ...

    @abstractmethod
    def is_normal(self, f) -> bool: ...

    @abstractmethod
    def solve(self, f, t: SmoothingParameter | None) -> StepOutcome: ...

    @abstractmethod
    def act(self, transform, f): ...

    @abstractmethod
    def compose(self, outer, inner): ...

    @abstractmethod
    def identity(self, f): ...

    def same(self, a, b) -> bool:
        return a == b


@dataclass
class StepRecord:
    d: int
    error_order: int | float
    norms: dict[str, fmpq] = field(default_factory=dict)
    displacement_order: int | float | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    t: SmoothingParameter | None = None
    elapsed_ms: float = 0.0

    def as_dict(self, timing: bool = False) -> dict:
        out = {"step": self.d, "error_order": _order(self.error_order),
               "displacement_order": _order(self.displacement_order),
               "norms": {k: qstr(v) for k, v in self.norms.items()},
               "checks": dict(self.checks)}
        if self.details:
            out["details"] = self.details
        if self.t is not None:
            out["t_exponent"] = qstr(self.t.exponent)
            out["t_approx"] = self.t.approx()
        if timing:
            out["elapsed_ms"] = round(self.elapsed_ms, 3)
        return out


def _order(v):
    if v is None:
        return None
    return "inf" if v == math.inf else int(v)


@dataclass
class IterationLog:
    mode: Mode
    t0: fmpq | None = None
    steps: list[StepRecord] = field(default_factory=list)
    final_order: int | float | None = None
    final_norms: dict[str, fmpq] = field(default_factory=dict)

    @property
    def orders(self) -> list:
        seq = [s.error_order for s in self.steps]
        if self.final_order is not None:
            seq.append(self.final_order)
        return seq

    def all_checks(self) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for s in self.steps:
            for k, v in s.checks.items():
                out[k] = out.get(k, True) and v
        return out


@dataclass
class RunResult:
    status: Status
    transform: Any
    element: Any
    log: IterationLog

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def _measure(instance: SCIInstance, f, d: int, constants: ScheduleConstants | None, zeta=None) -> dict:
    """Norms of the element and its error at orders ``l`` and ``L``.

    Majorant norms use the radius ``r_d``; spectral norms need ``r <= 1`` so
    they use ``r_d / 2``.
    """
    if constants is None:
        return {}
    zeta = instance.error(f) if zeta is None else zeta
    r = radius(d)
    out = {}
    for k, name in ((constants.l, "l"), (constants.L, "L")):
        out[f"error_spectral_{name}"] = spectral_norm(zeta, k, r / 2)
        out[f"element_spectral_{name}"] = spectral_norm(f, k, r / 2)
        out[f"error_majorant_{name}"] = majorant_norm(zeta, k, r)
        out[f"element_majorant_{name}"] = majorant_norm(f, k, r)
    return out


def run(instance: SCIInstance, f0, constants: ScheduleConstants | None = None,
        mode: Mode | str = Mode.FORMAL, max_steps: int = 10, t0=None,
        measure: bool = True, audit_projection: bool = False) -> RunResult:
    """Iterate until the error vanishes modulo truncation or ``max_steps`` is reached."""
    mode = Mode(mode)
    if mode is Mode.SCHEDULED:
        if t0 is None:
            raise ValueError("scheduled mode needs t0")
        t0 = fmpq(t0) if not isinstance(t0, fmpq) else t0
        if t0 <= 1:
            raise ValueError("t0 must exceed 1")
        if constants is not None:
            from .schedule import validate_constants
            bad = validate_constants(constants)
            if bad:
                raise ValueError(f"schedule constants violate {bad}")
    log = IterationLog(mode, t0 if mode is Mode.SCHEDULED else None)
    psi = instance.identity(f0)
    f = f0
    status = Status.UNCONVERGED
    for d in range(max_steps + 1):
        zeta = instance.error(f)
        order = instance.error_order(f)
        if audit_projection:
            p = instance.project(f)
            if not instance.same(instance.project(p), p):
                raise AssertionError(f"projection is not idempotent at step {d}")
        if instance.is_normal(f):
            status = Status.CONVERGED
            log.final_order = order
            if measure:
                log.final_norms = _measure(instance, f, d, constants, zeta)
            break
        if d == max_steps:
            log.final_order = order
            if measure:
                log.final_norms = _measure(instance, f, d, constants, zeta)
            break
        start = time.perf_counter()
        t = SmoothingParameter(t0, d) if mode is Mode.SCHEDULED else None
        try:
            outcome = instance.solve(f, t)
        except SolverFailure:
            raise
        except Exception as exc:
            raise SolverFailure(f"solver failed at step {d}: {exc}", snapshot=f) from exc
        nxt = outcome.next_element if outcome.next_element is not None else instance.act(outcome.transform, f)
        psi = instance.compose(outcome.transform, psi)
        rec = StepRecord(d, order, t=t, checks=dict(outcome.checks), details=dict(outcome.details))
        rec.displacement_order = _displacement_order(outcome.displacement)
        if measure:
            rec.norms = _measure(instance, f, d, constants, zeta)
            if constants is not None:
                r = radius(d)
                rec.norms["displacement_spectral_l"] = spectral_norm(outcome.displacement, constants.l, r / 2)
                rec.norms["displacement_majorant_l"] = majorant_norm(outcome.displacement, constants.l, r)
        rec.elapsed_ms = (time.perf_counter() - start) * 1000
        log.steps.append(rec)
        f = nxt
    return RunResult(status, psi, f, log)


def _displacement_order(disp):
    if disp is None:
        return None
    if isinstance(disp, (list, tuple)):
        return min((p.vanishing_order() for p in disp), default=math.inf)
    return disp.vanishing_order()


# -- audit ------------------------------------------------------------------------

@dataclass
class AuditLine:
    step: int
    name: str
    value: fmpq
    bound: str                 # human readable bound
    passed: bool
    t0_lower: float | None     # t0 must exceed this for the inequality to hold
    t0_upper: float | None     # t0 must stay below this

    def as_dict(self) -> dict:
        return {"step": self.step, "quantity": self.name, "value": qstr(self.value),
                "value_approx": approx_str(self.value),
                "bound": self.bound, "passed": self.passed,
                "t0_min_approx": _fmt(self.t0_lower), "t0_max_approx": _fmt(self.t0_upper)}


def _fmt(x):
    if x is None:
        return None
    if x == math.inf:
        return "inf"
    return f"{x:.6g}"


@dataclass
class AuditReport:
    t0: fmpq
    flavor: str
    lines: list[AuditLine] = field(default_factory=list)
    bounded_constant: float | None = None    # smallest C making the bounded-norm item hold
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(l.passed for l in self.lines)

    @property
    def t0_range(self) -> tuple[float, float]:
        lo = max((l.t0_lower for l in self.lines if l.t0_lower is not None), default=1.0)
        hi = min((l.t0_upper for l in self.lines if l.t0_upper is not None), default=math.inf)
        return lo, hi

    def as_dict(self) -> dict:
        lo, hi = self.t0_range
        return {"t0": qstr(self.t0), "flavor": self.flavor, "passed": self.passed,
                "t0_min_approx": _fmt(lo), "t0_max_approx": _fmt(hi),
                "bounded_norm_constant_approx": _fmt(self.bounded_constant),
                "note": self.note, "lines": [l.as_dict() for l in self.lines]}


AUDIT_NOTE = ("Bounds come from the analytic estimates; on exact jets the norms are "
              "finite-dimensional surrogates, so these lines are reported, not enforced.")


def _power_check(value: fmpq, t: SmoothingParameter, e: fmpq):
    """Is ``value < t**e``?  Also the admissible t0 range in the binding direction."""
    growth = float(t.exponent)
    if value == 0:
        return True, None, None
    lv = log_rational(value)
    rhs = float(e) * t.log()
    passed = lv < rhs
    if e > 0:
        lower = math.exp(min(lv / (float(e) * growth), 700.0)) if lv > 0 else 1.0
        return passed, lower, None
    if lv >= 0:
        return passed, None, 1.0        # no t0 > 1 works
    upper = math.exp(min(-lv / (-float(e) * growth), 700.0))
    return passed, None, upper


def _safe_float(x: fmpq) -> float:
    if x <= 0:
        return float(x)
    lg = log_rational(x)
    return math.inf if lg > 709 else math.exp(lg)


def audit_schedule(log: IterationLog, constants: ScheduleConstants, t0=None,
                   flavor: str = "spectral") -> AuditReport:
    """A-posteriori check of the five per-step estimates against measured norms."""
    t0 = fmpq(t0) if t0 is not None and not isinstance(t0, fmpq) else t0
    t0 = t0 if t0 is not None else (log.t0 or fmpq(2))
    rep = AuditReport(t0, flavor, note=AUDIT_NOTE)
    A = fmpq(constants.A)
    worst_c = 0.0
    for s in log.steps:
        if not s.norms:
            continue
        t = SmoothingParameter(t0, s.d)
        items = [
            ("1: displacement_l < t^-1/2", s.norms.get(f"displacement_{flavor}_l"), fmpq(-1, 2)),
            ("2: element_L < t^A", s.norms.get(f"element_{flavor}_L"), A),
            ("4: error_L < t^A", s.norms.get(f"error_{flavor}_L"), A),
            ("5: error_l < t^-1", s.norms.get(f"error_{flavor}_l"), fmpq(-1)),
        ]
        for name, value, e in items:
            if value is None:
                continue
            ok, lo, hi = _power_check(value, t, e)
            rep.lines.append(AuditLine(s.d, name, value, f"t_{s.d}^({qstr(e)})", ok, lo, hi))
        el = s.norms.get(f"element_{flavor}_l")
        if el is not None:
            c = _safe_float(el * fmpq(s.d + 2, s.d + 1))
            worst_c = max(worst_c, c)
    rep.bounded_constant = worst_c if log.steps else None
    return rep
