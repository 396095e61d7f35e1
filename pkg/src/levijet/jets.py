"""Truncated polynomial jets with exact rational coefficients.

A jet lives in a :class:`JetSpace` fixed by the number of variables and the
truncation degree ``cap``.  Monomials are stored under packed integer keys::

    key = |alpha| << (w*n)  |  alpha_0 << (w*(n-1))  | ... |  alpha_{n-1}

with slot width ``w`` chosen so that ``2**w > 2*cap``.  Adding two keys then
multiplies the monomials, no slot can overflow before truncation, and integer
order on keys is graded-lex order on exponent vectors.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass
from functools import cached_property
from math import inf
from typing import Iterable, Iterator, Mapping, Sequence

from flint import fmpq

from .rational import q


class CapMismatch(ValueError):
    """Raised when jets from different spaces are combined."""


@dataclass(frozen=True)
class JetSpace:
    n: int
    cap: int

    def __post_init__(self):
        if self.n < 1 or self.cap < 0:
            raise ValueError(f"invalid jet space n={self.n}, cap={self.cap}")

    @cached_property
    def width(self) -> int:
        return max(1, (2 * self.cap).bit_length())

    @cached_property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @cached_property
    def deg_shift(self) -> int:
        return self.width * self.n

    @cached_property
    def limit(self) -> int:
        """Smallest key whose degree exceeds ``cap``."""
        return (self.cap + 1) << self.deg_shift

    @cached_property
    def shifts(self) -> tuple[int, ...]:
        return tuple(self.width * (self.n - 1 - i) for i in range(self.n))

    @cached_property
    def units(self) -> tuple[int, ...]:
        return tuple((1 << s) | (1 << self.deg_shift) for s in self.shifts)

    def key(self, alpha: Sequence[int]) -> int:
        if len(alpha) != self.n:
            raise ValueError(f"exponent vector {tuple(alpha)} has length != {self.n}")
        k = sum(alpha) << self.deg_shift
        for e, s in zip(alpha, self.shifts):
            if e < 0:
                raise ValueError(f"negative exponent in {tuple(alpha)}")
            k |= e << s
        return k

    def exponent(self, key: int) -> tuple[int, ...]:
        return tuple((key >> s) & self.mask for s in self.shifts)

    def degree(self, key: int) -> int:
        return key >> self.deg_shift

    def monomial_keys(self, degree: int) -> list[int]:
        """Keys of all monomials of the given total degree, sorted."""
        keys = [self.key(a) for a in compositions(degree, self.n)]
        keys.sort()
        return keys

    # constructors -----------------------------------------------------------

    def zero(self) -> "JetPoly":
        return JetPoly(self, {})

    def const(self, c) -> "JetPoly":
        c = q(c)
        return JetPoly(self, {0: c} if c != 0 else {})

    def var(self, i: int) -> "JetPoly":
        if self.cap < 1:
            return self.zero()
        return JetPoly(self, {self.units[i]: fmpq(1)})

    def monomial(self, alpha: Sequence[int], coeff=1) -> "JetPoly":
        return self.poly({tuple(alpha): coeff})

    def poly(self, terms: Mapping[Sequence[int], object]) -> "JetPoly":
        """Build from ``{exponent vector: coefficient}``; terms above ``cap`` drop."""
        out = {}
        for alpha, c in terms.items():
            c = q(c)
            if c == 0 or sum(alpha) > self.cap:
                continue
            k = self.key(alpha)
            out[k] = out.get(k, 0) + c
        return JetPoly(self, {k: v for k, v in out.items() if v != 0})


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All exponent vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _check(a: "JetPoly", b: "JetPoly"):
    if a.space != b.space:
        raise CapMismatch(f"jet spaces differ: {a.space} vs {b.space}")


class JetPoly:
    """A polynomial truncated at ``space.cap``; immutable by convention."""

    __slots__ = ("space", "terms", "_sorted")

    def __init__(self, space: JetSpace, terms: dict[int, fmpq]):
        self.space = space
        self.terms = terms
        self._sorted = None

    # inspection -------------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return self.space.n

    @property
    def degree_cap(self) -> int:
        return self.space.cap

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def sorted_items(self) -> list[tuple[int, fmpq]]:
        if self._sorted is None:
            self._sorted = sorted(self.terms.items())
        return self._sorted

    def items(self) -> Iterator[tuple[tuple[int, ...], fmpq]]:
        """``(exponent vector, coefficient)`` pairs in graded-lex order."""
        ex = self.space.exponent
        for k, c in self.sorted_items():
            yield ex(k), c

    def coeff(self, alpha: Sequence[int]) -> fmpq:
        return self.terms.get(self.space.key(alpha), fmpq(0))

    def vanishing_order(self):
        if not self.terms:
            return inf
        return min(self.terms) >> self.space.deg_shift

    def max_degree(self) -> int:
        if not self.terms:
            return -1
        return max(self.terms) >> self.space.deg_shift

    def homogeneous(self, degree: int) -> "JetPoly":
        sh = self.space.deg_shift
        return JetPoly(self.space, {k: c for k, c in self.terms.items() if k >> sh == degree})

    def truncate(self, degree) -> "JetPoly":
        """Drop every term of total degree > ``degree``."""
        if degree >= self.space.cap:
            return self
        if degree < 0:
            return self.space.zero()
        lim = (int(degree) + 1) << self.space.deg_shift
        return JetPoly(self.space, {k: c for k, c in self.terms.items() if k < lim})

    def low(self, degree: int) -> "JetPoly":
        """Terms of degree >= ``degree``."""
        lim = degree << self.space.deg_shift
        return JetPoly(self.space, {k: c for k, c in self.terms.items() if k >= lim})

    def constant_term(self) -> fmpq:
        return self.terms.get(0, fmpq(0))

    def linear_part(self) -> "JetPoly":
        return self.homogeneous(1)

    def __eq__(self, other):
        if isinstance(other, JetPoly):
            return self.space == other.space and self.terms == other.terms
        if isinstance(other, (int, fmpq)):
            return self == self.space.const(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.space, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for alpha, c in self.items():
            mono = "*".join(f"z{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(alpha) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, JetPoly):
            other = self.space.const(other)
        _check(self, other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for k, c in small.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v == 0:
                    del out[k]
                else:
                    out[k] = v
        return JetPoly(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return JetPoly(self.space, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, JetPoly):
            other = self.space.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "JetPoly":
        c = q(c)
        if c == 0:
            return self.space.zero()
        if c == 1:
            return self
        return JetPoly(self.space, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, JetPoly):
            return self.scale(other)
        _check(self, other)
        if not self.terms or not other.terms:
            return self.space.zero()
        if len(other.terms) == 1 and 0 in other.terms:
            return self.scale(other.terms[0])
        if len(self.terms) == 1 and 0 in self.terms:
            return other.scale(self.terms[0])
        a, b = (self, other) if len(self.terms) <= len(other.terms) else (other, self)
        bitems = b.sorted_items()
        bkeys = [k for k, _ in bitems]
        limit = self.space.limit
        acc: dict[int, fmpq] = {}
        get = acc.get
        for ka, ca in a.terms.items():
            cut = bisect_left(bkeys, limit - ka)
            for kb, cb in bitems[:cut]:
                k = ka + kb
                v = get(k)
                acc[k] = ca * cb if v is None else v + ca * cb
        return JetPoly(self.space, {k: v for k, v in acc.items() if v != 0})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = self.space.const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def diff(self, i: int) -> "JetPoly":
        s = self.space.shifts[i]
        mask = self.space.mask
        unit = self.space.units[i]
        out = {}
        for k, c in self.terms.items():
            e = (k >> s) & mask
            if e:
                out[k - unit] = c * e
        return JetPoly(self.space, out)

    def gradient(self) -> list["JetPoly"]:
        return [self.diff(i) for i in range(self.space.n)]

    def degrees_in(self, variables: Iterable[int]) -> set[int]:
        """Set of partial degrees in the given variables over all terms."""
        sp = self.space
        vs = list(variables)
        return {sum((k >> sp.shifts[i]) & sp.mask for i in vs) for k in self.terms}


def linear_combination(space: JetSpace, pairs: Iterable[tuple[object, JetPoly]]) -> JetPoly:
    acc: dict[int, fmpq] = {}
    for c, p in pairs:
        c = q(c)
        if c == 0:
            continue
        for k, v in p.terms.items():
            acc[k] = acc.get(k, 0) + c * v
    return JetPoly(space, {k: v for k, v in acc.items() if v != 0})


def jet_sum(space: JetSpace, polys: Iterable[JetPoly]) -> JetPoly:
    acc: dict[int, fmpq] = {}
    for p in polys:
        for k, v in p.terms.items():
            acc[k] = acc.get(k, 0) + v
    return JetPoly(space, {k: v for k, v in acc.items() if v != 0})


# -- tensors -------------------------------------------------------------------

class JetVectorField:
    """``sum_i u_i d/dz_i`` with jet coefficients."""

    __slots__ = ("space", "components")

    def __init__(self, space: JetSpace, components: Sequence[JetPoly]):
        if len(components) != space.n:
            raise ValueError(f"vector field needs {space.n} components")
        for c in components:
            if c.space != space:
                raise CapMismatch("component degree caps disagree")
        self.space = space
        self.components = tuple(components)

    @classmethod
    def zero(cls, space: JetSpace) -> "JetVectorField":
        return cls(space, [space.zero()] * space.n)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other):
        return JetVectorField(self.space, [a + b for a, b in zip(self, other)])

    def __sub__(self, other):
        return JetVectorField(self.space, [a - b for a, b in zip(self, other)])

    def __neg__(self):
        return JetVectorField(self.space, [-a for a in self])

    def scale(self, c):
        return JetVectorField(self.space, [a.scale(c) for a in self])

    def __eq__(self, other):
        return isinstance(other, JetVectorField) and self.components == other.components

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def vanishing_order(self):
        return min((c.vanishing_order() for c in self.components), default=inf)

    def truncate(self, degree):
        return JetVectorField(self.space, [c.truncate(degree) for c in self])

    def apply(self, f: JetPoly) -> JetPoly:
        """Derivative of ``f`` along the field."""
        return jet_sum(self.space, (u * f.diff(i) for i, u in enumerate(self.components) if u))

    def __repr__(self):
        return "VF(" + ", ".join(repr(c) for c in self.components) + ")"


class JetBivector:
    """Antisymmetric bivector; stores ``pi[(i, j)]`` for ``i < j`` only."""

    __slots__ = ("space", "comps")

    def __init__(self, space: JetSpace, comps: Mapping[tuple[int, int], JetPoly]):
        out = {}
        for (i, j), p in comps.items():
            if p.space != space:
                raise CapMismatch("component degree caps disagree")
            if i == j:
                if not p.is_zero():
                    raise ValueError("diagonal bivector component must vanish")
                continue
            if i > j:
                i, j, p = j, i, -p
            if (i, j) in out:
                p = out[(i, j)] + p
            if not p.is_zero():
                out[(i, j)] = p
            else:
                out.pop((i, j), None)
        self.space = space
        self.comps = out

    @classmethod
    def zero(cls, space: JetSpace) -> "JetBivector":
        return cls(space, {})

    def __call__(self, i: int, j: int) -> JetPoly:
        if i < j:
            return self.comps.get((i, j), self.space.zero())
        if i > j:
            p = self.comps.get((j, i))
            return -p if p is not None else self.space.zero()
        return self.space.zero()

    def pairs(self):
        n = self.space.n
        return [(i, j) for i in range(n) for j in range(i + 1, n)]

    def __add__(self, other):
        keys = set(self.comps) | set(other.comps)
        return JetBivector(self.space, {k: self(*k) + other(*k) for k in keys})

    def __sub__(self, other):
        keys = set(self.comps) | set(other.comps)
        return JetBivector(self.space, {k: self(*k) - other(*k) for k in keys})

    def __eq__(self, other):
        return isinstance(other, JetBivector) and self.space == other.space and self.comps == other.comps

    def is_zero(self):
        return not self.comps

    def truncate(self, degree):
        return JetBivector(self.space, {k: p.truncate(degree) for k, p in self.comps.items()})

    def homogeneous(self, degree):
        return JetBivector(self.space, {k: p.homogeneous(degree) for k, p in self.comps.items()})

    def linear_part(self):
        return self.homogeneous(1)

    def vanishing_order(self):
        return min((p.vanishing_order() for p in self.comps.values()), default=inf)

    def __repr__(self):
        return "Bivector{" + ", ".join(f"{k}: {p!r}" for k, p in sorted(self.comps.items())) + "}"


class JetTrivector:
    """Antisymmetric trivector; ``comps[(i, j, k)]`` with ``i < j < k``."""

    __slots__ = ("space", "comps")

    def __init__(self, space: JetSpace, comps: Mapping[tuple[int, int, int], JetPoly]):
        self.space = space
        self.comps = {k: p for k, p in comps.items() if not p.is_zero()}

    def is_zero(self):
        return not self.comps

    def truncate(self, degree):
        return JetTrivector(self.space, {k: p.truncate(degree) for k, p in self.comps.items()})

    def witness(self):
        """First nonzero ``((i, j, k), exponent, coefficient)`` or None."""
        for key in sorted(self.comps):
            alpha, c = next(self.comps[key].items())
            return key, alpha, c
        return None


class JetDiffeo:
    """A jet of a diffeomorphism ``z -> z + chi(z)`` with ``chi`` of order >= 2."""

    __slots__ = ("space", "components")

    def __init__(self, space: JetSpace, components: Sequence[JetPoly], check: bool = True):
        if len(components) != space.n:
            raise ValueError(f"diffeo needs {space.n} components")
        self.space = space
        self.components = tuple(components)
        if check:
            for i, comp in enumerate(self.components):
                if comp.space != space:
                    raise CapMismatch("component degree caps disagree")
                disp = comp - space.var(i)
                if disp.vanishing_order() < 2:
                    raise ValueError(f"component {i}: linear part must be the identity and no constant term")

    @classmethod
    def identity(cls, space: JetSpace) -> "JetDiffeo":
        return cls(space, [space.var(i) for i in range(space.n)], check=False)

    @classmethod
    def from_displacement(cls, space: JetSpace, chi: Sequence[JetPoly]) -> "JetDiffeo":
        return cls(space, [space.var(i) + c for i, c in enumerate(chi)])

    def displacement(self) -> list[JetPoly]:
        return [c - self.space.var(i) for i, c in enumerate(self.components)]

    def is_identity(self) -> bool:
        return all(c.is_zero() for c in self.displacement())

    def __getitem__(self, i):
        return self.components[i]

    def __eq__(self, other):
        return isinstance(other, JetDiffeo) and self.components == other.components

    def __repr__(self):
        return "Diffeo(" + ", ".join(repr(c) for c in self.components) + ")"


# -- composition -----------------------------------------------------------------

class Composer:
    """Caches ``theta^alpha`` for every monomial so many jets can share one substitution."""

    def __init__(self, theta: Sequence[JetPoly], space: JetSpace):
        self.space = space
        self.theta = list(theta)
        self.cache: dict[int, JetPoly] = {0: space.const(1)}
        self._shifts = space.shifts
        self._mask = space.mask

    def image(self, key: int) -> JetPoly:
        img = self.cache.get(key)
        if img is not None:
            return img
        sp = self.space
        # peel off the last variable present
        for i in range(sp.n - 1, -1, -1):
            if (key >> self._shifts[i]) & self._mask:
                break
        img = self.image(key - sp.units[i]) * self.theta[i]
        self.cache[key] = img
        return img

    def __call__(self, f: JetPoly) -> JetPoly:
        if f.space != self.space:
            raise CapMismatch("jet spaces differ")
        acc: dict[int, fmpq] = {}
        for k, c in f.sorted_items():
            for kk, v in self.image(k).terms.items():
                acc[kk] = acc.get(kk, 0) + c * v
        return JetPoly(self.space, {k: v for k, v in acc.items() if v != 0})


def _components(theta) -> Sequence[JetPoly]:
    return theta.components if isinstance(theta, (JetDiffeo, JetVectorField)) else theta


def compose(f: JetPoly, theta) -> JetPoly:
    """``f o theta`` truncated at the cap."""
    comps = _components(theta)
    return Composer(comps, f.space)(f)


def compose_diffeos(outer: JetDiffeo, inner: JetDiffeo) -> JetDiffeo:
    """``outer o inner``."""
    _check(outer[0], inner[0])
    comp = Composer(inner.components, inner.space)
    return JetDiffeo(inner.space, [comp(c) for c in outer.components], check=False)


def invert(theta: JetDiffeo) -> JetDiffeo:
    """Two-sided inverse modulo degree > cap.

    Fixed-point iteration ``xi <- -chi o (Id + xi)``; each pass fixes at least
    one more degree, so it stops after at most ``cap - 1`` passes.
    """
    sp = theta.space
    chi = theta.displacement()
    xi = [sp.zero()] * sp.n
    for _ in range(max(sp.cap, 1)):
        comp = Composer([sp.var(i) + x for i, x in enumerate(xi)], sp)
        new = [-comp(c) for c in chi]
        if new == xi:
            break
        xi = new
    return JetDiffeo(sp, [sp.var(i) + x for i, x in enumerate(xi)], check=False)


# -- Poisson calculus ------------------------------------------------------------

def hamiltonian_components(pi: JetBivector, grad: Sequence[JetPoly]) -> list[JetPoly]:
    """``{f, z_l} = sum_k pi_kl d_k f`` for every ``l``, given ``grad = df``."""
    sp = pi.space
    n = sp.n
    out = []
    for l in range(n):
        terms = []
        for k in range(n):
            if k == l or grad[k].is_zero():
                continue
            p = pi(k, l)
            if p.is_zero():
                continue
            terms.append(p * grad[k])
        out.append(jet_sum(sp, terms))
    return out


def hamiltonian(pi: JetBivector, f: JetPoly) -> list[JetPoly]:
    """Components ``{f, z_l}`` of the Hamiltonian field of ``f``; reusable across many brackets."""
    return hamiltonian_components(pi, f.gradient())


def bracket_from_hamiltonian(ham: Sequence[JetPoly], g: JetPoly) -> JetPoly:
    """``{f, g}`` given ``ham = hamiltonian(pi, f)``."""
    sp = g.space
    terms = []
    for l, h in enumerate(ham):
        if h:
            d = g.diff(l)
            if d:
                terms.append(h * d)
    return jet_sum(sp, terms)


def poisson_bracket(pi: JetBivector, f: JetPoly, g: JetPoly) -> JetPoly:
    """``sum_{i<j} pi_ij (d_i f d_j g - d_j f d_i g)`` truncated at the cap."""
    for p in (f, g):
        if p.space != pi.space:
            raise CapMismatch("bracket arguments live in a different jet space")
    sp = pi.space
    df = f.gradient()
    dg = g.gradient()
    terms = []
    for (i, j), p in pi.comps.items():
        minor = None
        if df[i] and dg[j]:
            minor = df[i] * dg[j]
        if df[j] and dg[i]:
            t = df[j] * dg[i]
            minor = -t if minor is None else minor - t
        if minor is not None and minor:
            terms.append(p * minor)
    return jet_sum(sp, terms)


def bracket_with_coordinate(pi: JetBivector, f: JetPoly, l: int) -> JetPoly:
    """``{f, z_l}``; cheaper than the general bracket."""
    sp = pi.space
    terms = []
    for k in range(sp.n):
        if k == l:
            continue
        d = f.diff(k)
        if d:
            p = pi(k, l)
            if p:
                terms.append(p * d)
    return jet_sum(sp, terms)


def schouten_jacobiator(pi: JetBivector) -> JetTrivector:
    """Components ``{z_i,{z_j,z_k}} + cyclic`` for ``i < j < k``."""
    sp = pi.space
    n = sp.n
    grads = {}

    def grad(i, j):
        if (i, j) not in grads:
            grads[(i, j)] = pi(i, j).gradient()
        return grads[(i, j)]

    def inner(i, j, k):
        # {z_i, pi_jk} = sum_l pi_il d_l pi_jk
        g = grad(j, k)
        return jet_sum(sp, (pi(i, l) * g[l] for l in range(n) if l != i and g[l] and pi(i, l)))

    out = {}
    for i, j, k in itertools.combinations(range(n), 3):
        out[(i, j, k)] = inner(i, j, k) + inner(j, k, i) + inner(k, i, j)
    return JetTrivector(sp, out)


def is_poisson(pi: JetBivector, modulo_degree: int | None = None) -> bool:
    """Jacobiator vanishes in degrees <= ``modulo_degree`` (default ``cap - 1``)."""
    d = pi.space.cap - 1 if modulo_degree is None else modulo_degree
    return schouten_jacobiator(pi).truncate(d).is_zero()


def pushforward(pi: JetBivector, theta: JetDiffeo, theta_inv: JetDiffeo | None = None) -> JetBivector:
    """``theta_* pi``: component ``(i, j)`` is ``{theta_i, theta_j}_pi o theta^{-1}``."""
    sp = pi.space
    if theta.space != sp:
        raise CapMismatch("diffeo and bivector live in different jet spaces")
    if theta_inv is None:
        theta_inv = invert(theta)
    n = sp.n
    grads = [c.gradient() for c in theta.components]
    ham = [hamiltonian_components(pi, g) for g in grads]
    comp = Composer(theta_inv.components, sp)
    out = {}
    for i in range(n):
        for j in range(i + 1, n):
            br = jet_sum(sp, (ham[i][l] * grads[j][l] for l in range(n) if ham[i][l] and grads[j][l]))
            out[(i, j)] = comp(br)
    return JetBivector(sp, out)


def linear_vector_field(space: JetSpace, L: Sequence[Sequence]) -> JetVectorField:
    """``sum_jk L[j][k] z_k d/dz_j``."""
    comps = []
    for j in range(space.n):
        comps.append(space.poly({tuple(1 if t == k else 0 for t in range(space.n)): L[j][k]
                                 for k in range(space.n) if L[j][k] != 0}))
    return JetVectorField(space, comps)


def lie_bracket(X: JetVectorField, Y: JetVectorField) -> JetVectorField:
    """``[X, Y]`` of vector fields."""
    return JetVectorField(X.space, [X.apply(Y[i]) - Y.apply(X[i]) for i in range(X.space.n)])


def vanishing_order(obj) -> float | int:
    if isinstance(obj, (JetPoly, JetVectorField, JetBivector, JetTrivector)):
        if isinstance(obj, JetTrivector):
            return min((p.vanishing_order() for p in obj.comps.values()), default=inf)
        return obj.vanishing_order()
    if hasattr(obj, "vanishing_order"):
        return obj.vanishing_order()
    raise TypeError(f"no vanishing order for {type(obj).__name__}")
