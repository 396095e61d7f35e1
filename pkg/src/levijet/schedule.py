"""Norm families on jets, degree-cutoff smoothing and the Nash-Moser schedule constants.

Two norms are provided.  ``majorant_norm`` bounds the sup of all derivatives
of order ``<= k`` over the ball of radius ``r`` by summing absolute
coefficients.  ``spectral_norm`` weights each monomial by ``max(1,|alpha|)^k``
so that degree truncation is a smoothing operator with constant exactly 1.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from flint import fmpq

from .jets import JetBivector, JetPoly, JetSpace, JetVectorField, compositions
from .rational import q, qstr


class Variant(str, Enum):
    MAIN = "main"
    APPENDIX = "appendix"


# -- constants ---------------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleConstants:
    n: int
    s: int
    A: int
    epsilon: fmpq
    l: int
    L: int
    variant: Variant
    tau: fmpq | None = None

    def as_dict(self) -> dict:
        out = {"n": self.n, "variant": self.variant.value, "s": self.s, "A": self.A,
               "epsilon": qstr(self.epsilon), "l": self.l, "L": self.L}
        if self.tau is not None:
            out["tau"] = qstr(self.tau)
        return out


def sobolev_loss(n: int) -> int:
    return n // 2 + 1


def plan_constants(n: int, variant: Variant | str = Variant.MAIN, tau=None) -> ScheduleConstants:
    """Deterministic admissible constants.

    ``epsilon`` is half the supremum allowed by the ``A``-inequality and
    ``l`` the smallest integer strictly above both lower bounds.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    variant = Variant(variant)
    s = sobolev_loss(n)
    if variant is Variant.MAIN:
        A = 6 * s + 9
        eps = fmpq(1, 8 * (A + 1))
        floor_l = max(s, 1 + (3 * s + 5) / eps)
        tau_q = None
    else:
        if tau is None:
            raise ValueError("appendix variant needs tau")
        tau_q = q(tau)
        if tau_q < 0:
            raise ValueError("tau must be non-negative")
        A = 6 * s + 5
        eps = 1 / (8 * (1 + A * (1 + tau_q / 2)))
        floor_l = max(3 * s + 3, 1 + (2 * s + 2) / eps)
    l = int(math.floor(floor_l)) + 1
    return ScheduleConstants(n, s, A, eps, l, 2 * l - 1, variant, tau_q)


def validate_constants(c: ScheduleConstants) -> list[str]:
    """Names of violated inequalities; empty when admissible."""
    bad = []
    eps = c.epsilon
    if c.s != sobolev_loss(c.n):
        bad.append("s")
    if not 0 < eps < 1:
        bad.append("epsilon range")
    if c.variant is Variant.MAIN:
        if c.A != 6 * c.s + 9 or not c.A > 6 * c.s + 8:
            bad.append("A")
        if not -(1 - eps) + c.A * eps < fmpq(-3, 4):
            bad.append("epsilon bound")
        if not c.l > c.s:
            bad.append("l > s")
        if not fmpq(3 * c.s + 5, c.l - 1) < eps:
            bad.append("l vs epsilon")
    else:
        tau = c.tau if c.tau is not None else fmpq(0)
        if c.A != 6 * c.s + 5 or not c.A > 6 * c.s + 4:
            bad.append("A")
        if not -(1 - eps) + c.A * (1 + tau / 2) * eps < fmpq(-3, 4):
            bad.append("epsilon bound")
        if not c.l > 3 * c.s + 3:
            bad.append("l > 3s+3")
        if not fmpq(2 * c.s + 2, c.l - 1) < eps:
            bad.append("l vs epsilon")
    if c.L != 2 * c.l - 1:
        bad.append("L")
    return bad


# -- schedule ----------------------------------------------------------------------

def log_rational(x) -> float:
    x = q(x)
    if x <= 0:
        raise ValueError("log of non-positive rational")
    return math.log(int(x.p)) - math.log(int(x.q))


def approx_str(x) -> str:
    """Scientific rendering of a possibly enormous rational."""
    x = q(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    lg = log_rational(abs(x)) / math.log(10)
    exp10 = math.floor(lg)
    return f"{sign}{10 ** (lg - exp10):.6f}e{exp10:+d}"


@dataclass(frozen=True)
class SmoothingParameter:
    """``t = t0 ** (3/2)**d`` kept symbolically."""
    t0: fmpq
    d: int

    @property
    def exponent(self) -> fmpq:
        return fmpq(3, 2) ** self.d

    def log(self) -> float:
        return float(self.exponent) * log_rational(self.t0)

    def exact(self) -> fmpq | None:
        """Exact rational value when it is one (always for d = 0)."""
        e = self.exponent
        num, den = int(e.p), int(e.q)
        root = _exact_root(self.t0, den)
        return None if root is None else root ** num

    def approx(self) -> str:
        lg = self.log() / math.log(10)
        if lg < 15:
            return f"{10 ** lg:.6g}"
        mant = 10 ** (lg - math.floor(lg))
        return f"{mant:.6f}e+{int(math.floor(lg))}"

    def cutoff(self) -> int | float:
        """Largest degree kept by ``S(t)``: floor of ``t`` (inf beyond float range)."""
        ex = self.exact()
        if ex is not None:
            return int(math.floor(ex))
        lg = self.log()
        if lg > 700:
            return math.inf
        return int(math.floor(math.exp(lg)))

    def compare_power(self, base: int, power: int) -> int:
        """Sign of ``t - base**power``."""
        ex = self.exact()
        if ex is not None:
            other = fmpq(base) ** power
            return (ex > other) - (ex < other)
        # t0^(3^d) vs base^(power 2^d), exactly while the integers stay small
        d = self.d
        if d <= 10:
            lhs_num = int(self.t0.p) ** (3 ** d)
            lhs_den = int(self.t0.q) ** (3 ** d)
            rhs = base ** (power * 2 ** d)
            a, b = lhs_num, lhs_den * rhs
            return (a > b) - (a < b)
        diff = self.log() - power * math.log(base)
        return 1 if diff > 0 else -1


def _exact_root(x: fmpq, k: int) -> fmpq | None:
    if k == 1:
        return x
    p, qq = int(x.p), int(x.q)
    rp, rq = _iroot(p, k), _iroot(qq, k)
    if rp is None or rq is None:
        return None
    return fmpq(rp, rq)


def _iroot(v: int, k: int) -> int | None:
    if v < 0:
        return None
    if v <= 1:
        return v
    if k >= v.bit_length():     # 2**k > v, so no integer root above 1
        return None
    lo, hi = 0, 1 << (v.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** k <= v:
            lo = mid
        else:
            hi = mid - 1
    return lo if lo ** k == v else None


@dataclass(frozen=True)
class ScheduleEntry:
    d: int
    t: SmoothingParameter
    r: fmpq
    too_small: bool     # t_d^{-1/2} >= 1/(d+2)^2

    def as_dict(self) -> dict:
        ex = self.t.exact()
        return {"d": self.d, "t_exponent": qstr(self.t.exponent),
                "t": qstr(ex) if ex is not None else None,
                "t_approx": self.t.approx(), "r": qstr(self.r),
                "t0_too_small": self.too_small}


@dataclass
class ScheduleSequence:
    t0: fmpq
    entries: list[ScheduleEntry]

    @property
    def flagged(self) -> list[int]:
        return [e.d for e in self.entries if e.too_small]

    def __getitem__(self, d) -> ScheduleEntry:
        return self.entries[d]


def radius(d: int) -> fmpq:
    return 1 + fmpq(1, d + 1)


def schedule(t0, d_max: int) -> ScheduleSequence:
    t0 = q(t0)
    if t0 <= 1:
        raise ValueError("t0 must exceed 1")
    entries = []
    for d in range(d_max + 1):
        t = SmoothingParameter(t0, d)
        # t^{-1/2} >= (d+2)^{-2}  <=>  t <= (d+2)^4
        too_small = t.compare_power(d + 2, 4) <= 0
        entries.append(ScheduleEntry(d, t, radius(d), too_small))
    return ScheduleSequence(t0, entries)


# -- norms -------------------------------------------------------------------------

def _polys(obj) -> list[JetPoly]:
    if isinstance(obj, JetPoly):
        return [obj]
    if isinstance(obj, JetVectorField):
        return list(obj.components)
    if isinstance(obj, JetBivector):
        return list(obj.comps.values())
    if isinstance(obj, (list, tuple)):
        out = []
        for o in obj:
            out.extend(_polys(o))
        return out
    if hasattr(obj, "values") and hasattr(obj, "degree"):     # cochain
        return _polys(list(obj.values.values()))
    if hasattr(obj, "components"):
        return list(obj.components)
    raise TypeError(f"cannot take a norm of {type(obj).__name__}")


def _weighted_abs_sum(f: JetPoly, r: fmpq, weight=None) -> fmpq:
    sh = f.space.deg_shift
    total = fmpq(0)
    pows: dict[int, fmpq] = {}
    for key, c in f.terms.items():
        deg = key >> sh
        rp = pows.get(deg)
        if rp is None:
            rp = pows[deg] = r ** deg
        w = abs(c) * rp
        if weight is not None:
            w = w * weight(deg)
        total += w
    return total


def _majorant_single(f: JetPoly, k: int, r: fmpq) -> fmpq:
    """``max_beta sum_alpha |c_alpha| alpha!/(alpha-beta)! r^(|alpha|-|beta|)`` over ``|beta| <= k``.

    Sums run over integers scaled by a common denominator.
    """
    cap = f.space.cap
    rp, rq = int(r.p), int(r.q)
    den = 1
    for _, c in f.items():
        den = math.lcm(den, int(c.q))
    scale = [rp ** e * rq ** (cap - e) for e in range(cap + 1)]
    falling = [[math.perm(e, b) for b in range(e + 1)] for e in range(cap + 1)]
    sums: dict[tuple, int] = {}
    for alpha, c in f.items():
        base = abs(int(c.p)) * (den // int(c.q))
        deg = sum(alpha)
        for beta in itertools.product(*(range(e + 1) for e in alpha)):
            order = sum(beta)
            if order > k:
                continue
            w = base * scale[deg - order]
            for e, b in zip(alpha, beta):
                if b:
                    w *= falling[e][b]
            sums[beta] = sums.get(beta, 0) + w
    if not sums:
        return fmpq(0)
    return fmpq(max(sums.values()), den * rq ** cap)


def majorant_norm(obj, k: int, r) -> fmpq:
    """``max_{|beta|<=k} sum_alpha |coeff of D^beta f at alpha| r^|alpha|``, max over components."""
    if k < 0:
        raise ValueError("order must be >= 0")
    r = q(r)
    if r <= 0:
        raise ValueError("radius must be positive")
    return max((_majorant_single(f, k, r) for f in _polys(obj)), default=fmpq(0))


def spectral_norm(obj, k: int, r) -> fmpq:
    """``sum_alpha |c_alpha| max(1,|alpha|)^k r^|alpha|``, max over components."""
    if k < 0:
        raise ValueError("order must be >= 0")
    r = q(r)
    if not 0 < r <= 1:
        raise ValueError("spectral norm needs 0 < r <= 1")
    cache: dict[int, int] = {}

    def weight(deg):
        w = cache.get(deg)
        if w is None:
            w = cache[deg] = max(1, deg) ** k
        return w

    return max((_weighted_abs_sum(f, r, weight) for f in _polys(obj)), default=fmpq(0))


class NormFlavor(str, Enum):
    MAJORANT = "majorant"
    SPECTRAL = "spectral"


def norm(flavor: NormFlavor | str, obj, k: int, r) -> fmpq:
    flavor = NormFlavor(flavor)
    return majorant_norm(obj, k, r) if flavor is NormFlavor.MAJORANT else spectral_norm(obj, k, r)


def smoothing(obj, t):
    """Keep terms of total degree ``<= t``; ``t`` may be a rational or a :class:`SmoothingParameter`."""
    if isinstance(t, SmoothingParameter):
        cut = t.cutoff()
    else:
        t = q(t)
        if t <= 1:
            raise ValueError("smoothing parameter must exceed 1")
        cut = int(math.floor(t))
    return _truncate(obj, cut)


def _truncate(obj, cut):
    if cut == math.inf:
        return obj
    if isinstance(obj, (JetPoly, JetVectorField, JetBivector)):
        return obj.truncate(cut)
    if hasattr(obj, "map") and hasattr(obj, "degree"):
        return obj.map(lambda v: v.truncate(cut))
    if isinstance(obj, (list, tuple)):
        return type(obj)(_truncate(o, cut) for o in obj)
    raise TypeError(f"cannot smooth {type(obj).__name__}")


# -- SCI axiom audit ---------------------------------------------------------------

@dataclass
class AxiomResult:
    name: str
    passed: bool
    worst_ratio: float      # measured best constant (max of lhs/rhs over samples)
    cases: int
    witness: object = None


@dataclass
class AxiomReport:
    flavor: NormFlavor
    results: list[AxiomResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name) -> AxiomResult:
        return next(r for r in self.results if r.name == name)


def random_jet(space: JetSpace, rng: random.Random, density: float = 0.3, size: int = 5,
               lo: int = 0) -> JetPoly:
    terms = {}
    for d in range(lo, space.cap + 1):
        for a in compositions(d, space.n):
            if rng.random() < density:
                c = fmpq(rng.randint(-size, size), rng.randint(1, 4))
                if c != 0:
                    terms[a] = c
    return space.poly(terms)


def _ratio(lhs: fmpq, rhs: fmpq) -> float:
    if lhs == 0:
        return 0.0
    if rhs == 0:
        return math.inf
    return float(lhs / rhs)


def check_sci_axioms(flavor: NormFlavor | str, samples: Sequence[JetPoly], *,
                     orders: Sequence[int] = range(7), ts: Sequence[int] = (2, 3, 5, 8),
                     radii: Sequence = (fmpq(1, 2), fmpq(1))) -> AxiomReport:
    """Monotonicity, both smoothing inequalities and interpolation with ``C = 1``.

    Constant-1 checks are exact rational comparisons (interpolation compares
    integer powers).  The reported ratio is the largest ``lhs/rhs`` observed.
    """
    flavor = NormFlavor(flavor)
    report = AxiomReport(flavor)
    orders = list(orders)
    acc = {name: [True, 0.0, 0, None] for name in ("monotonicity", "smoothing", "smoothing remainder", "interpolation")}

    def record(name, lhs, rhs, witness):
        entry = acc[name]
        entry[2] += 1
        ratio = _ratio(lhs, rhs)
        if ratio > entry[1]:
            entry[1] = ratio
        if lhs > rhs and entry[0]:
            entry[0] = False
            entry[3] = witness

    for si, f in enumerate(samples):
        for r in radii:
            vals = {k: norm(flavor, f, k, r) for k in orders}
            for k in orders[:-1]:
                record("monotonicity", vals[k], vals[k + 1], (si, k, qstr(r)))
            if r != radii[-1]:
                bigger = radii[-1]
                for k in orders:
                    record("monotonicity", vals[k], norm(flavor, f, k, bigger), (si, k, qstr(r)))
            for t in ts:
                low = smoothing(f, t)
                high = f - low
                lv = {k: norm(flavor, low, k, r) for k in orders}
                hv = {k: norm(flavor, high, k, r) for k in orders}
                for p in orders:
                    for qq in orders:
                        if p < qq:
                            continue
                        record("smoothing", lv[p], fmpq(t) ** (p - qq) * vals[qq], (si, t, p, qq))
                        # ||(I-S)f||_q <= t^{q-p} ||f||_p
                        record("smoothing remainder", hv[qq] * fmpq(t) ** (p - qq), vals[p], (si, t, p, qq))
            # (|f|_q)^{p-s} <= (|f|_s)^{p-q} (|f|_p)^{q-s}
            for lo in orders:
                for mid in orders:
                    for hi in orders:
                        if not lo <= mid <= hi or lo == hi:
                            continue
                        lhs = vals[mid] ** (hi - lo)
                        rhs = vals[lo] ** (hi - mid) * vals[hi] ** (mid - lo)
                        if lhs == 0 and rhs == 0:
                            record("interpolation", lhs, rhs, None)
                            continue
                        ratio_ok = lhs <= rhs
                        # normalised constant: (lhs/rhs)^{1/(hi-lo)}
                        entry = acc["interpolation"]
                        entry[2] += 1
                        if rhs == 0:
                            c = math.inf
                        else:
                            c = float(lhs / rhs) ** (1 / (hi - lo))
                        entry[1] = max(entry[1], c)
                        if not ratio_ok and entry[0]:
                            entry[0] = False
                            entry[3] = (si, lo, mid, hi, qstr(r))
    for name, (ok, worst, cases, wit) in acc.items():
        report.results.append(AxiomResult(name, ok, worst, cases, wit))
    return report
